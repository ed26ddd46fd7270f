//! Regret-matching solvers. The Nash baseline runs RM+ / CFR+ self-play;
//! every other solver updates only the leader's regrets against a follower
//! oracle (quantal response, best response, or a random mix of both).

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{BehavioralStrategy, ExtensiveFormGame, Game, Player, RealizationPlan};
use crate::metrics::{self, Evaluation};
use crate::qse::{GaTraceRow, LocalOptimum};
use crate::quantal::{best_response_unchecked, quantal_response_unchecked, QuantalModel};

/// Iteration weighting of the average strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    Uniform,
    /// Iteration `t` contributes with weight `t`.
    #[default]
    Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegretConfig {
    pub iterations: usize,
    /// Stop once the run's certificate drops below this; 0 disables.
    pub tolerance: f64,
    /// Iterations between convergence checks.
    pub check_every: usize,
    /// Iterations between trace rows; 0 records no trace.
    pub trace_every: usize,
    pub averaging: Averaging,
}

impl RegretConfig {
    pub fn new(iterations: usize) -> Self {
        Self { iterations, tolerance: 0.0, check_every: 100, trace_every: 0, averaging: Averaging::Linear }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_trace(mut self, every: usize) -> Self {
        self.trace_every = every;
        self
    }

    pub fn with_averaging(mut self, averaging: Averaging) -> Self {
        self.averaging = averaging;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.check_every == 0 {
            return Err(Error::Config("check_every must be at least 1".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Config("tolerance must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Regret-matching+ accumulators for one player.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretState {
    cumulative_regret: Vec<Vec<f64>>,
    cumulative_strategy: Vec<Vec<f64>>,
    iteration: usize,
    averaging: Averaging,
}

fn normalized_or_uniform(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter().map(|x| x / s).collect()
    } else {
        vec![1.0 / w.len() as f64; w.len()]
    }
}

impl RegretState {
    pub fn new(action_counts: &[usize], averaging: Averaging) -> Self {
        let zeros: Vec<Vec<f64>> = action_counts.iter().map(|&n| vec![0.0; n]).collect();
        Self { cumulative_regret: zeros.clone(), cumulative_strategy: zeros, iteration: 0, averaging }
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn cumulative_regret(&self) -> &[Vec<f64>] {
        &self.cumulative_regret
    }

    /// Regret-matching strategy: positive regrets normalized, uniform when
    /// none is positive.
    pub fn current_strategy(&self) -> BehavioralStrategy {
        BehavioralStrategy::new(self.cumulative_regret.iter().map(|r| normalized_or_uniform(r)).collect())
    }

    pub fn average_strategy(&self) -> BehavioralStrategy {
        BehavioralStrategy::new(self.cumulative_strategy.iter().map(|s| normalized_or_uniform(s)).collect())
    }

    /// One RM+ step. `values[I][a]` are the (counterfactual) action values
    /// under the profile that used `current`, and `reach[I]` the player's
    /// own probability of reaching `I` under `current`.
    pub fn update(&mut self, values: &[Vec<f64>], current: &BehavioralStrategy, reach: &[f64]) {
        self.iteration += 1;
        let w = match self.averaging {
            Averaging::Uniform => 1.0,
            Averaging::Linear => self.iteration as f64,
        };
        for (i, v) in values.iter().enumerate() {
            let sigma = current.infoset(i);
            let ev: f64 = v.iter().zip(sigma).map(|(x, p)| x * p).sum();
            for (r, x) in self.cumulative_regret[i].iter_mut().zip(v) {
                *r = (*r + x - ev).max(0.0);
            }
            for (s, p) in self.cumulative_strategy[i].iter_mut().zip(sigma) {
                *s += w * reach[i] * p;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub iter: usize,
    /// Mixing probability or combination weight, where the solver has one.
    pub param: Option<f64>,
    /// Leader utility of the current strategy against the quantal response.
    pub eu_vs_qr: Option<f64>,
    pub epsilon: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub algorithm: String,
    /// The leader strategy the solver returns (the average for regret runs).
    pub strategy: BehavioralStrategy,
    /// Last iterate of the leader.
    pub final_strategy: BehavioralStrategy,
    /// Follower average, for self-play runs.
    pub follower: Option<BehavioralStrategy>,
    pub iterations: usize,
    pub converged: bool,
    /// Nash gap for self-play; otherwise the leader's epsilon-best-response
    /// certificate against the run's follower oracle applied to `strategy`.
    pub certificate: f64,
    pub tuned_param: Option<f64>,
    pub trace: Vec<TraceRow>,
    pub wall_time: Duration,
    /// Filled in by [`SolveReport::evaluate`].
    pub evaluation: Option<Evaluation>,
    /// Local optima of each gradient-ascent restart.
    pub optima: Vec<LocalOptimum>,
    pub ga_trace: Vec<GaTraceRow>,
    /// Degenerate situations the solver worked around.
    pub notes: Vec<String>,
}

impl SolveReport {
    /// Recomputes gain, exploitability and both utilities from `strategy`.
    pub fn evaluate(&mut self, game: &Game, model: &QuantalModel, game_value: Option<f64>) -> Result<()> {
        self.evaluation = Some(metrics::evaluate(game, &self.strategy, model, game_value)?);
        Ok(())
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Action values and own reach of `player` for a regret update.
fn regret_inputs(
    game: &Game,
    leader: &BehavioralStrategy,
    follower: &BehavioralStrategy,
    player: Player,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    match game {
        Game::Normal(g) => {
            let v = match player {
                Player::Leader => g.leader_row_values(follower.infoset(0)),
                Player::Follower => g.follower_col_values(leader.infoset(0)),
            };
            (vec![v], vec![1.0])
        }
        Game::Extensive(g) => {
            let own = match player {
                Player::Leader => leader,
                Player::Follower => follower,
            };
            let cfv = g.counterfactual_values_unchecked(leader, follower, player);
            (cfv.action, g.own_reach(player, own))
        }
    }
}

/// Leader's gain from deviating against a fixed follower strategy.
fn leader_epsilon(game: &Game, leader: &BehavioralStrategy, follower: &BehavioralStrategy) -> f64 {
    let current = game.expected_utility_unchecked(leader, follower)[0];
    best_response_unchecked(game, follower, Player::Leader).value - current
}

fn qr_epsilon(game: &Game, leader: &BehavioralStrategy, model: &QuantalModel) -> f64 {
    leader_epsilon(game, leader, &quantal_response_unchecked(game, leader, model))
}

fn check_model(game: &Game, model: &QuantalModel) -> Result<()> {
    model.validate()?;
    model.check_action_counts(&game.action_counts(Player::Follower))
}

/// RM+ (matrix games) or CFR+ (trees) self-play with alternating updates.
/// Returns both average strategies; the certificate is the Nash gap.
pub fn solve_nash(game: &Game, config: &RegretConfig) -> Result<SolveReport> {
    config.validate()?;
    let start = Instant::now();
    let mut states = [
        RegretState::new(&game.action_counts(Player::Leader), config.averaging),
        RegretState::new(&game.action_counts(Player::Follower), config.averaging),
    ];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut done = 0;
    for t in 1..=config.iterations {
        let follower = states[1].current_strategy();
        let leader = states[0].current_strategy();
        let (v, r) = regret_inputs(game, &leader, &follower, Player::Leader);
        states[0].update(&v, &leader, &r);
        let leader = states[0].current_strategy();
        let (v, r) = regret_inputs(game, &leader, &follower, Player::Follower);
        states[1].update(&v, &follower, &r);
        done = t;

        let check = config.tolerance > 0.0 && t % config.check_every == 0;
        let record = config.trace_every > 0 && t % config.trace_every == 0;
        if check || record {
            let (l, f) = (states[0].average_strategy(), states[1].average_strategy());
            let gap = metrics::nash_gap_unchecked(game, &l, &f);
            if record {
                trace.push(TraceRow {
                    iter: t,
                    param: None,
                    eu_vs_qr: None,
                    epsilon: gap,
                    wall_ms: ms(start),
                });
            }
            if check && gap < config.tolerance {
                converged = true;
                break;
            }
        }
    }
    let (l, f) = (states[0].average_strategy(), states[1].average_strategy());
    let gap = metrics::nash_gap_unchecked(game, &l, &f);
    Ok(SolveReport {
        algorithm: "nash".into(),
        final_strategy: states[0].current_strategy(),
        strategy: l,
        follower: Some(f),
        iterations: done,
        converged: converged || (config.tolerance > 0.0 && gap < config.tolerance),
        certificate: gap,
        tuned_param: None,
        trace,
        wall_time: start.elapsed(),
        ..SolveReport::default()
    })
}

/// Shared loop for solvers that update only the leader. `respond` maps the
/// iteration index and the leader's current strategy to the follower
/// strategy it is played against; `certify` scores an average strategy.
fn leader_loop<R, C>(
    game: &Game,
    config: &RegretConfig,
    trace_model: Option<&QuantalModel>,
    param: Option<f64>,
    start: Instant,
    mut respond: R,
    mut certify: C,
) -> (RegretState, usize, bool, Vec<TraceRow>)
where
    R: FnMut(&BehavioralStrategy) -> BehavioralStrategy,
    C: FnMut(&BehavioralStrategy) -> f64,
{
    let mut state = RegretState::new(&game.action_counts(Player::Leader), config.averaging);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut done = 0;
    for t in 1..=config.iterations {
        let leader = state.current_strategy();
        let follower = respond(&leader);
        let (v, r) = regret_inputs(game, &leader, &follower, Player::Leader);
        state.update(&v, &leader, &r);
        done = t;

        let check = config.tolerance > 0.0 && t % config.check_every == 0;
        let record = config.trace_every > 0 && t % config.trace_every == 0;
        if check || record {
            let eps = certify(&state.average_strategy());
            if record {
                let current = state.current_strategy();
                trace.push(TraceRow {
                    iter: t,
                    param,
                    eu_vs_qr: trace_model.map(|m| metrics::eu_vs_qr_unchecked(game, &current, m)),
                    epsilon: eps,
                    wall_ms: ms(start),
                });
            }
            if check && eps < config.tolerance {
                converged = true;
                break;
            }
        }
    }
    (state, done, converged, trace)
}

fn leader_report(
    algorithm: &str,
    state: RegretState,
    iterations: usize,
    converged: bool,
    certificate: f64,
    tuned_param: Option<f64>,
    trace: Vec<TraceRow>,
    start: Instant,
) -> SolveReport {
    SolveReport {
        algorithm: algorithm.into(),
        final_strategy: state.current_strategy(),
        strategy: state.average_strategy(),
        follower: None,
        iterations,
        converged,
        certificate,
        tuned_param,
        trace,
        wall_time: start.elapsed(),
        ..SolveReport::default()
    }
}

/// RM-QR / CFR-QR: the leader runs regret matching against the quantal
/// response to her current strategy; the average is returned. The
/// certificate is the leader's epsilon-best-response against the quantal
/// response to that average.
pub fn solve_qne(game: &Game, model: &QuantalModel, config: &RegretConfig) -> Result<SolveReport> {
    config.validate()?;
    check_model(game, model)?;
    let start = Instant::now();
    let (state, done, converged, trace) = leader_loop(
        game,
        config,
        Some(model),
        None,
        start,
        |l| quantal_response_unchecked(game, l, model),
        |avg| qr_epsilon(game, avg, model),
    );
    let eps = qr_epsilon(game, &state.average_strategy(), model);
    let converged = converged || (config.tolerance > 0.0 && eps < config.tolerance);
    Ok(leader_report("qne", state, done, converged, eps, None, trace, start))
}

/// CFR-BR: the leader plays against an exact best response (lowest index
/// on ties) to her current strategy.
pub fn solve_cfr_br(game: &Game, config: &RegretConfig) -> Result<SolveReport> {
    config.validate()?;
    let start = Instant::now();
    let br = |l: &BehavioralStrategy| best_response_unchecked(game, l, Player::Follower).strategy;
    let certify = |avg: &BehavioralStrategy| leader_epsilon(game, avg, &br(avg));
    let (state, done, _, trace) = leader_loop(
        game,
        &RegretConfig { tolerance: 0.0, ..config.clone() },
        None,
        None,
        start,
        br,
        certify,
    );
    let eps = certify(&state.average_strategy());
    Ok(leader_report("cfr_br", state, done, false, eps, None, trace, start))
}

/// Combination `alpha * first + (1 - alpha) * second` of two strategies of
/// the same player, weighting each by its own reach of the infoset: the
/// realization plans are mixed and converted back. Infosets neither
/// strategy reaches get a uniform distribution; their indices are returned.
pub fn convex_combine_efg(
    game: &ExtensiveFormGame,
    player: Player,
    first: &BehavioralStrategy,
    second: &BehavioralStrategy,
    alpha: f64,
) -> Result<(BehavioralStrategy, Vec<usize>)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("combination weight {alpha} outside [0, 1]")));
    }
    let r1 = RealizationPlan::from_strategy(game, player, first)?;
    let r2 = RealizationPlan::from_strategy(game, player, second)?;
    if alpha == 1.0 {
        return Ok((first.clone(), Vec::new()));
    }
    if alpha == 0.0 {
        return Ok((second.clone(), Vec::new()));
    }
    Ok(r1.mix(&r2, alpha).to_strategy())
}

/// Combination used by the sweep: pointwise for matrix games, reach
/// weighted for trees.
pub fn combine(
    game: &Game,
    qne: &BehavioralStrategy,
    nash: &BehavioralStrategy,
    alpha: f64,
) -> Result<BehavioralStrategy> {
    Ok(combine_flagged(game, qne, nash, alpha)?.0)
}

/// Like [`combine`], also returning infosets that fell back to uniform.
fn combine_flagged(
    game: &Game,
    qne: &BehavioralStrategy,
    nash: &BehavioralStrategy,
    alpha: f64,
) -> Result<(BehavioralStrategy, Vec<usize>)> {
    match game {
        Game::Normal(_) => {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::Domain(format!("combination weight {alpha} outside [0, 1]")));
            }
            game.check_strategy(Player::Leader, qne)?;
            game.check_strategy(Player::Leader, nash)?;
            let s = match alpha {
                a if a == 0.0 => nash.clone(),
                a if a == 1.0 => qne.clone(),
                a => qne.pointwise_mix(nash, a),
            };
            Ok((s, Vec::new()))
        }
        Game::Extensive(g) => convex_combine_efg(g, Player::Leader, qne, nash, alpha),
    }
}

/// COMB: sweeps `alpha` over `sweep_size` evenly spaced values in [0, 1]
/// (0 is the Nash input, 1 the QNE input) and keeps the mixture with the
/// highest utility against the quantal response. Ties keep the smaller
/// weight, so the result is never worse than the Nash input.
pub fn solve_comb(
    game: &Game,
    model: &QuantalModel,
    nash: &BehavioralStrategy,
    qne: &BehavioralStrategy,
    sweep_size: usize,
) -> Result<SolveReport> {
    if sweep_size < 2 {
        return Err(Error::Config("sweep size must be at least 2".into()));
    }
    check_model(game, model)?;
    let start = Instant::now();
    let mut best: Option<(f64, f64, BehavioralStrategy)> = None;
    let mut trace = Vec::with_capacity(sweep_size);
    let mut notes = Vec::new();
    for k in 0..sweep_size {
        let alpha = k as f64 / (sweep_size - 1) as f64;
        let (s, fallback) = combine_flagged(game, qne, nash, alpha)?;
        if !fallback.is_empty() {
            notes.push(format!("alpha {alpha}: uniform fallback at leader infosets {fallback:?}"));
        }
        let eu = metrics::eu_vs_qr_unchecked(game, &s, model);
        trace.push(TraceRow {
            iter: k,
            param: Some(alpha),
            eu_vs_qr: Some(eu),
            epsilon: qr_epsilon(game, &s, model),
            wall_ms: ms(start),
        });
        if best.as_ref().map_or(true, |(b, _, _)| eu > *b) {
            best = Some((eu, alpha, s));
        }
    }
    let (_, alpha, strategy) = best.expect("sweep is non-empty");
    let certificate = qr_epsilon(game, &strategy, model);
    Ok(SolveReport {
        algorithm: "comb".into(),
        final_strategy: strategy.clone(),
        strategy,
        follower: None,
        iterations: sweep_size,
        converged: true,
        certificate,
        tuned_param: Some(alpha),
        trace,
        wall_time: start.elapsed(),
        notes,
        ..SolveReport::default()
    })
}

/// Settings of the restricted-response solver.
#[derive(Clone, Debug, PartialEq)]
pub struct RqrConfig {
    pub phase1_iterations: usize,
    pub phase2: RegretConfig,
    pub seed: u64,
    pub initial_p: f64,
    pub step: f64,
    pub threshold: f64,
    /// Skip the first phase and use this probability.
    pub fixed_p: Option<f64>,
    /// Subtracted from utilities when measuring gain in the first phase.
    pub game_value: f64,
    pub trace_every: usize,
}

impl RqrConfig {
    pub fn new(phase1_iterations: usize, phase2_iterations: usize, seed: u64) -> Self {
        Self {
            phase1_iterations,
            phase2: RegretConfig::new(phase2_iterations),
            seed,
            initial_p: 0.5,
            step: 0.01,
            threshold: 1.00001,
            fixed_p: None,
            game_value: 0.0,
            trace_every: 0,
        }
    }

    /// Half the budget tunes `p`, the other half is the clean run.
    pub fn split(iterations: usize, seed: u64) -> Self {
        let first = iterations / 2;
        Self::new(first.max(1), (iterations - first).max(1), seed)
    }

    pub fn with_fixed_p(mut self, p: f64) -> Self {
        self.fixed_p = Some(p);
        self
    }

    pub fn with_game_value(mut self, v: f64) -> Self {
        self.game_value = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.phase2.validate()?;
        if self.fixed_p.is_none() && self.phase1_iterations == 0 {
            return Err(Error::Config("first phase needs at least one iteration".into()));
        }
        for (name, p) in [("initial_p", Some(self.initial_p)), ("fixed_p", self.fixed_p)] {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
                }
            }
        }
        if !(self.step >= 0.0 && self.threshold >= 1.0) {
            return Err(Error::Config("step must be nonnegative and threshold at least 1".into()));
        }
        Ok(())
    }
}

/// Direction rule for the mixing probability. Returns +1 when the gain
/// rose past the threshold, -1 when it fell past it, 0 otherwise.
fn gain_direction(old: f64, new: f64, threshold: f64) -> i32 {
    let (up, down) = if old >= 0.0 { (old * threshold, old / threshold) } else { (old / threshold, old * threshold) };
    if new > up {
        1
    } else if new < down {
        -1
    } else {
        0
    }
}

/// RQR: the follower oracle answers with the quantal response with
/// probability `p` and with a best response otherwise. The first phase
/// adapts `p` from the observed gain changes; the second phase reruns
/// from scratch with `p` frozen and returns its average strategy.
pub fn solve_rqr(game: &Game, model: &QuantalModel, config: &RqrConfig) -> Result<SolveReport> {
    config.validate()?;
    check_model(game, model)?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let qr = |l: &BehavioralStrategy| quantal_response_unchecked(game, l, model);
    let br = |l: &BehavioralStrategy| best_response_unchecked(game, l, Player::Follower).strategy;
    let mut trace = Vec::new();

    let p = match config.fixed_p {
        Some(p) => p,
        None => {
            let mut p = config.initial_p;
            let mut step = config.step;
            let decay = 0.5f64.powf(1.0 / config.phase1_iterations as f64);
            let mut state = RegretState::new(&game.action_counts(Player::Leader), config.phase2.averaging);
            let mut old_gain: Option<f64> = None;
            for t in 1..=config.phase1_iterations {
                let leader = state.current_strategy();
                let use_qr = rng.gen::<f64>() < p;
                let follower = if use_qr { qr(&leader) } else { br(&leader) };
                let (v, r) = regret_inputs(game, &leader, &follower, Player::Leader);
                state.update(&v, &leader, &r);
                let current = state.current_strategy();
                let eu = metrics::eu_vs_qr_unchecked(game, &current, model);
                let gain = eu - config.game_value;
                if let Some(old) = old_gain {
                    let d = gain_direction(old, gain, config.threshold) as f64;
                    p += if use_qr { d * step } else { -d * step };
                    p = p.clamp(0.0, 1.0);
                }
                old_gain = Some(gain);
                step *= decay;
                if config.trace_every > 0 && t % config.trace_every == 0 {
                    trace.push(TraceRow {
                        iter: t,
                        param: Some(p),
                        eu_vs_qr: Some(eu),
                        epsilon: qr_epsilon(game, &current, model),
                        wall_ms: ms(start),
                    });
                }
            }
            p
        }
    };

    let offset = trace.len();
    let phase2 = RegretConfig { tolerance: 0.0, trace_every: config.trace_every, ..config.phase2.clone() };
    let (state, done, _, mut rows) = leader_loop(
        game,
        &phase2,
        Some(model),
        Some(p),
        start,
        |l| if rng.gen::<f64>() < p { qr(l) } else { br(l) },
        |avg| qr_epsilon(game, avg, model),
    );
    for row in &mut rows {
        row.iter += config.fixed_p.map_or(config.phase1_iterations, |_| 0);
    }
    trace.splice(offset.., rows);
    let eps = qr_epsilon(game, &state.average_strategy(), model);
    Ok(leader_report("rqr", state, done, false, eps, Some(p), trace, start))
}
