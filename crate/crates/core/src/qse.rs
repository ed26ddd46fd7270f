//! Gradient ascent on the leader's utility against a quantal-responding
//! follower, and the search for the best strategy among Nash equilibria.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{BehavioralStrategy, ExtensiveFormGame, Game, NormalFormGame, Player};
use crate::metrics::GameValue;
use crate::quantal::{clqr_unchecked, QuantalModel};
use crate::regret::{solve_nash, RegretConfig, SolveReport};
use crate::simplex::project;

/// Sufficient-increase constant of the Armijo rule.
const ARMIJO_C: f64 = 1e-4;
/// Steps shorter than this count as underflow.
const MIN_STEP: f64 = 1e-16;
/// Weight of the constraint violation in the equilibrium-set search.
pub const NE_PENALTY: f64 = 1e4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub max_iters: usize,
    pub step_size_init: f64,
    pub armijo_backtrack_factor: f64,
    /// Stop when no coordinate moves by more than this.
    pub convergence_tol: f64,
    /// Total number of starts, the Nash start included.
    pub restarts: usize,
    pub finite_diff_h: f64,
    pub seed: u64,
    /// Self-play iterations used to compute the Nash start.
    pub nash_iterations: usize,
    pub record_trace: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            step_size_init: 1.0,
            armijo_backtrack_factor: 0.5,
            convergence_tol: 1e-10,
            restarts: 8,
            finite_diff_h: 1e-6,
            seed: 0,
            nash_iterations: 10_000,
            record_trace: false,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("step_size_init", self.step_size_init),
            ("convergence_tol", self.convergence_tol),
            ("finite_diff_h", self.finite_diff_h),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.armijo_backtrack_factor > 0.0 && self.armijo_backtrack_factor < 1.0) {
            return Err(Error::Config("armijo_backtrack_factor must lie in (0, 1)".into()));
        }
        if self.max_iters == 0 || self.restarts == 0 || self.nash_iterations == 0 {
            return Err(Error::Config("max_iters, restarts and nash_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaTraceRow {
    pub restart_id: usize,
    pub iter: usize,
    pub objective: f64,
    pub step: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalOptimum {
    pub restart_id: usize,
    pub strategy: BehavioralStrategy,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Leader utility when the follower quantally responds to `leader`.
pub fn qse_objective_nfg(game: &NormalFormGame, leader: &[f64], model: &QuantalModel) -> Result<f64> {
    let y = crate::quantal::nfg_quantal_response(game, leader, model)?;
    Ok(dot(&y, &game.leader_col_values(leader)))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn objective_nfg(game: &NormalFormGame, x: &[f64], model: &QuantalModel) -> f64 {
    let p = model.respond(&game.follower_col_values(x));
    dot(&p, &game.leader_col_values(x))
}

/// Gradient of the objective with respect to the leader's mixed strategy
/// (treated as an unconstrained vector). Logit uses the closed form,
/// ordering-based responses are locally constant, custom generators fall
/// back to central differences.
pub fn qse_gradient_nfg(game: &NormalFormGame, x: &[f64], model: &QuantalModel, h: f64) -> Vec<f64> {
    let (rows, cols) = (game.rows(), game.cols());
    match model {
        QuantalModel::Logit { lambda } => {
            let lv = game.leader_col_values(x);
            let p = model.respond(&game.follower_col_values(x));
            let obj = dot(&p, &lv);
            (0..rows)
                .map(|r| {
                    (0..cols)
                        .map(|a| {
                            p[a] * (game.leader_payoff(r, a)
                                + lambda * game.follower_payoff(r, a) * (lv[a] - obj))
                        })
                        .sum()
                })
                .collect()
        }
        QuantalModel::OrderingBased { .. } => {
            let p = model.respond(&game.follower_col_values(x));
            game.leader_row_values(&p)
        }
        QuantalModel::Custom(_) => central_differences(&[x.to_vec()], h, |b| objective_nfg(game, &b[0], model))
            .pop()
            .unwrap(),
    }
}

fn central_differences(x: &[Vec<f64>], h: f64, f: impl Fn(&[Vec<f64>]) -> f64) -> Vec<Vec<f64>> {
    let mut probe = x.to_vec();
    let mut grad: Vec<Vec<f64>> = x.iter().map(|b| vec![0.0; b.len()]).collect();
    for i in 0..x.len() {
        for a in 0..x[i].len() {
            let orig = probe[i][a];
            probe[i][a] = orig + h;
            let up = f(&probe);
            probe[i][a] = orig - h;
            let down = f(&probe);
            probe[i][a] = orig;
            grad[i][a] = (up - down) / (2.0 * h);
        }
    }
    grad
}

/// Projected gradient ascent over a product of simplices with Armijo
/// backtracking. `on_accept` sees every accepted iterate.
fn ascend(
    start: Vec<Vec<f64>>,
    config: &GaConfig,
    restart_id: usize,
    objective: &dyn Fn(&[Vec<f64>]) -> f64,
    gradient: &dyn Fn(&[Vec<f64>]) -> Vec<Vec<f64>>,
    on_accept: &mut dyn FnMut(&[Vec<f64>], f64),
    trace: Option<&mut Vec<GaTraceRow>>,
) -> LocalOptimum {
    let mut x: Vec<Vec<f64>> = start.iter().map(|b| project(b)).collect();
    let mut f = objective(&x);
    on_accept(&x, f);
    let mut step = config.step_size_init;
    let mut converged = false;
    let mut iterations = 0;
    let mut rows = Vec::new();
    for it in 1..=config.max_iters {
        iterations = it;
        let g = gradient(&x);
        let grad_norm = g.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        let mut accepted = None;
        while step >= MIN_STEP {
            let cand: Vec<Vec<f64>> = x
                .iter()
                .zip(&g)
                .map(|(b, gb)| project(&b.iter().zip(gb).map(|(p, d)| p + step * d).collect::<Vec<_>>()))
                .collect();
            let dir: f64 = cand.iter().flatten().zip(x.iter().flatten()).zip(g.iter().flatten())
                .map(|((c, p), d)| (c - p) * d)
                .sum();
            let moved = cand
                .iter()
                .flatten()
                .zip(x.iter().flatten())
                .map(|(c, p)| (c - p).abs())
                .fold(0.0, f64::max);
            if moved == 0.0 {
                break;
            }
            let fc = objective(&cand);
            if fc >= f + ARMIJO_C * dir {
                accepted = Some((cand, fc, moved));
                break;
            }
            step *= config.armijo_backtrack_factor;
        }
        match accepted {
            None => {
                converged = true;
                break;
            }
            Some((cand, fc, moved)) => {
                x = cand;
                f = fc;
                on_accept(&x, f);
                if trace.is_some() {
                    rows.push(GaTraceRow { restart_id, iter: it, objective: f, step, grad_norm });
                }
                if moved < config.convergence_tol {
                    converged = true;
                    break;
                }
                step = (step / config.armijo_backtrack_factor).min(config.step_size_init);
            }
        }
    }
    if let Some(t) = trace {
        t.extend(rows);
    }
    LocalOptimum { restart_id, strategy: BehavioralStrategy::new(x), objective: f, iterations, converged }
}

/// Start points: the Nash start first, then Dirichlet(1) draws per infoset.
fn starts(nash: &BehavioralStrategy, counts: &[usize], config: &GaConfig) -> Vec<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = vec![nash.probs().to_vec()];
    for _ in 1..config.restarts {
        out.push(
            counts
                .iter()
                .map(|&n| {
                    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                    let s: f64 = e.iter().sum();
                    e.into_iter().map(|v| v / s).collect()
                })
                .collect(),
        );
    }
    out
}

fn nash_start(game: &Game, config: &GaConfig, given: Option<&BehavioralStrategy>) -> Result<BehavioralStrategy> {
    match given {
        Some(s) => {
            game.check_strategy(Player::Leader, s)?;
            Ok(s.clone())
        }
        None => Ok(solve_nash(game, &RegretConfig::new(config.nash_iterations))?.strategy),
    }
}

fn multi_start(
    algorithm: &str,
    counts: &[usize],
    nash: &BehavioralStrategy,
    config: &GaConfig,
    objective: &dyn Fn(&[Vec<f64>]) -> f64,
    gradient: &dyn Fn(&[Vec<f64>]) -> Vec<Vec<f64>>,
) -> SolveReport {
    let start = Instant::now();
    let mut trace = Vec::new();
    let mut optima = Vec::with_capacity(config.restarts);
    for (k, x0) in starts(nash, counts, config).into_iter().enumerate() {
        let t = if config.record_trace { Some(&mut trace) } else { None };
        optima.push(ascend(x0, config, k, objective, gradient, &mut |_, _| {}, t));
    }
    // first restart wins ties, so the Nash start is preferred
    let best = optima
        .iter()
        .enumerate()
        .fold(0, |b, (k, o)| if o.objective > optima[b].objective { k } else { b });
    let chosen = &optima[best];
    SolveReport {
        algorithm: algorithm.into(),
        strategy: chosen.strategy.clone(),
        final_strategy: chosen.strategy.clone(),
        iterations: optima.iter().map(|o| o.iterations).sum(),
        converged: chosen.converged,
        certificate: f64::NAN,
        wall_time: start.elapsed(),
        optima,
        ga_trace: trace,
        ..SolveReport::default()
    }
}

/// Multi-start projected gradient ascent on a matrix game. `nash` is the
/// first start; when absent it is computed by self-play.
pub fn solve_qse_ga_nfg(
    game: &NormalFormGame,
    model: &QuantalModel,
    config: &GaConfig,
    nash: Option<&BehavioralStrategy>,
) -> Result<SolveReport> {
    config.validate()?;
    model.validate()?;
    model.check_action_counts(&[game.cols()])?;
    let wrapped: Game = game.clone().into();
    let nash = nash_start(&wrapped, config, nash)?;
    let h = config.finite_diff_h;
    Ok(multi_start(
        "ga",
        &[game.rows()],
        &nash,
        config,
        &|x| objective_nfg(game, &x[0], model),
        &|x| vec![qse_gradient_nfg(game, &x[0], model, h)],
    ))
}

/// Tree version: the follower is the counterfactual quantal response and
/// the gradient over the leader's behavioral strategy is taken by central
/// differences.
pub fn solve_qse_ga_efg(
    game: &ExtensiveFormGame,
    model: &QuantalModel,
    config: &GaConfig,
    nash: Option<&BehavioralStrategy>,
) -> Result<SolveReport> {
    config.validate()?;
    model.validate()?;
    model.check_action_counts(&game.action_counts(Player::Follower))?;
    let wrapped: Game = game.clone().into();
    let nash = nash_start(&wrapped, config, nash)?;
    let objective = |x: &[Vec<f64>]| {
        let leader = BehavioralStrategy::new(x.to_vec());
        let follower = clqr_unchecked(game, &leader, model);
        game.expected_utility_unchecked(&leader, &follower)[0]
    };
    let h = config.finite_diff_h;
    Ok(multi_start(
        "ga",
        &game.action_counts(Player::Leader),
        &nash,
        config,
        &objective,
        &|x| central_differences(x, h, objective),
    ))
}

/// Dispatches on the kind of game.
pub fn solve_qse_ga(
    game: &Game,
    model: &QuantalModel,
    config: &GaConfig,
    nash: Option<&BehavioralStrategy>,
) -> Result<SolveReport> {
    match game {
        Game::Normal(g) => solve_qse_ga_nfg(g, model, config, nash),
        Game::Extensive(g) => solve_qse_ga_efg(g, model, config, nash),
    }
}

fn min_with_index(v: &[f64]) -> (usize, f64) {
    v.iter().copied().enumerate().fold((0, f64::INFINITY), |b, (i, x)| if x < b.1 { (i, x) } else { b })
}

/// Best utility against the quantal response among leader strategies that
/// guarantee the game value up to the value's gap: gradient ascent on the
/// objective minus a large multiple of the guarantee shortfall, starting
/// from the Nash strategy. Returns the best feasible iterate; when none is
/// feasible the start is returned and a note is added.
pub fn best_ne_search(
    game: &NormalFormGame,
    model: &QuantalModel,
    config: &GaConfig,
    value: &GameValue,
    nash: &BehavioralStrategy,
) -> Result<SolveReport> {
    if !game.is_zero_sum() {
        return Err(Error::NotZeroSum("equilibrium-set search"));
    }
    config.validate()?;
    model.validate()?;
    model.check_action_counts(&[game.cols()])?;
    crate::game::check_mixed(nash.probs().first().map_or(&[][..], |v| v), game.rows(), "leader")?;
    let start = Instant::now();
    let bound = value.value - value.gap;
    let h = config.finite_diff_h;
    let objective = |x: &[Vec<f64>]| {
        let (_, worst) = min_with_index(&game.leader_col_values(&x[0]));
        objective_nfg(game, &x[0], model) - NE_PENALTY * (bound - worst).max(0.0)
    };
    let gradient = |x: &[Vec<f64>]| {
        let mut g = qse_gradient_nfg(game, &x[0], model, h);
        let (j, worst) = min_with_index(&game.leader_col_values(&x[0]));
        if worst < bound {
            for (r, gr) in g.iter_mut().enumerate() {
                *gr += NE_PENALTY * game.leader_payoff(r, j);
            }
        }
        vec![g]
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut trace = Vec::new();
    let opt = ascend(
        nash.probs().to_vec(),
        config,
        0,
        &objective,
        &gradient,
        &mut |x, _| {
            let (_, worst) = min_with_index(&game.leader_col_values(&x[0]));
            if worst >= bound {
                let f = objective_nfg(game, &x[0], model);
                if best.as_ref().map_or(true, |(b, _)| f > *b) {
                    best = Some((f, x[0].clone()));
                }
            }
        },
        if config.record_trace { Some(&mut trace) } else { None },
    );
    let mut notes = Vec::new();
    let strategy = match best {
        Some((_, x)) => BehavioralStrategy::mixed(x),
        None => {
            notes.push("no feasible iterate; returning the Nash start".to_string());
            nash.clone()
        }
    };
    Ok(SolveReport {
        algorithm: "best_ne".into(),
        final_strategy: opt.strategy.clone(),
        strategy,
        iterations: opt.iterations,
        converged: notes.is_empty(),
        certificate: f64::NAN,
        wall_time: start.elapsed(),
        optima: vec![opt],
        ga_trace: trace,
        notes,
        ..SolveReport::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logit_gradient_matches_finite_differences() {
        let g = NormalFormGame::zero_sum(vec![vec![-4.0, -5.0, 8.0, -4.0], vec![-5.0, -4.0, -4.0, 8.0]]).unwrap();
        let m = QuantalModel::logit(0.92).unwrap();
        let x = [0.3, 0.7];
        let a = qse_gradient_nfg(&g, &x, &m, 1e-6);
        let n = central_differences(&[x.to_vec()], 1e-6, |b| objective_nfg(&g, &b[0], &m));
        for (u, v) in a.iter().zip(&n[0]) {
            assert!((u - v).abs() <= 1e-5 * v.abs().max(1.0), "{u} vs {v}");
        }
    }

    #[test]
    fn single_row_game_is_trivial() {
        let g = NormalFormGame::zero_sum(vec![vec![1.0, 2.0, 3.0]]).unwrap();
        let m = QuantalModel::logit(1.0).unwrap();
        let r = solve_qse_ga_nfg(&g, &m, &GaConfig::default(), None).unwrap();
        assert_eq!(r.strategy.infoset(0), &[1.0]);
        let y = m.respond(&[-1.0, -2.0, -3.0]);
        let expected: f64 = y.iter().zip([1.0, 2.0, 3.0]).map(|(p, u)| p * u).sum();
        assert!((r.optima[0].objective - expected).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = GaConfig::default();
        c.restarts = 0;
        assert!(c.validate().is_err());
        let mut c = GaConfig::default();
        c.armijo_backtrack_factor = 1.0;
        assert!(c.validate().is_err());
    }
}
