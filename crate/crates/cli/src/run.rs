//! The subcommands.
//!
//! Work is split into independent (game, job) pairs run on a rayon pool;
//! results are collected in configuration order so output does not depend
//! on the number of workers.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use quantal_core::metrics::{self, Evaluation, GameValue};
use quantal_core::qse::{best_ne_search, solve_qse_ga};
use quantal_core::regret::{combine, solve_cfr_br, solve_comb, solve_nash, solve_qne, solve_rqr};
use quantal_core::{Game, Player, RegretConfig, RqrConfig, SolveReport};
use rayon::prelude::*;

use crate::config::{AlgorithmSpec, ExperimentConfig, GameInstance};
use crate::output::{self, ResultRow, StrategyFile};

/// A configuration plus the command-line overrides.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub out: PathBuf,
    pub timing: bool,
}

/// A game together with its value, when it has one.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub instance: GameInstance,
    pub value: Option<GameValue>,
}

impl Prepared {
    fn v(&self) -> Option<f64> {
        self.value.map(|v| v.value)
    }
}

impl Experiment {
    pub fn new(
        mut config: ExperimentConfig,
        out: Option<PathBuf>,
        workers: Option<usize>,
        seed: Option<u64>,
        timing: bool,
    ) -> Self {
        if let Some(w) = workers {
            config.workers = Some(w);
        }
        if let Some(s) = seed {
            config.seed = s;
        }
        let out = out.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("results"));
        Self { config, out, timing }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.config.workers {
            if w == 0 {
                bail!("workers must be at least 1");
            }
            builder = builder.num_threads(w);
        }
        Ok(builder.build()?)
    }

    fn seed_for(&self, game: &GameInstance, extra: u64) -> u64 {
        self.config.seed.wrapping_add(game.seed.unwrap_or(0)).wrapping_add(extra)
    }

    /// Builds every game and computes the values of the zero-sum ones.
    pub fn prepare(&self, pool: &rayon::ThreadPool) -> Result<Vec<Prepared>> {
        let games = self.config.instances()?;
        let cfg = self.config.value.regret_config();
        let values: Vec<Result<Option<GameValue>>> = pool.install(|| {
            games
                .par_iter()
                .map(|g| {
                    if g.game.is_zero_sum() {
                        metrics::game_value(&g.game, &cfg)
                            .map(Some)
                            .with_context(|| format!("game value of {}", g.id))
                    } else {
                        Ok(None)
                    }
                })
                .collect()
        });
        games
            .into_iter()
            .zip(values)
            .map(|(instance, value)| Ok(Prepared { instance, value: value? }))
            .collect()
    }

    fn regret_config(&self, iterations: usize, tolerance: f64) -> RegretConfig {
        RegretConfig::new(iterations).with_tolerance(tolerance).with_trace(self.config.trace_every)
    }

    /// Runs one configured algorithm against the training model.
    pub fn run_algorithm(&self, p: &Prepared, spec: &AlgorithmSpec) -> Result<SolveReport> {
        let game: &Game = &p.instance.game;
        let model = self.config.training_model();
        let mut report = match spec {
            AlgorithmSpec::Nash { iterations, tolerance } => {
                solve_nash(game, &self.regret_config(*iterations, *tolerance))?
            }
            AlgorithmSpec::Qne { iterations, tolerance } => {
                solve_qne(game, &model, &self.regret_config(*iterations, *tolerance))?
            }
            AlgorithmSpec::CfrBr { iterations } => solve_cfr_br(game, &self.regret_config(*iterations, 0.0))?,
            AlgorithmSpec::Comb { iterations, sweep_size } => {
                let cfg = RegretConfig::new(*iterations);
                let nash = solve_nash(game, &cfg)?.strategy;
                let qne = solve_qne(game, &model, &cfg)?.strategy;
                solve_comb(game, &model, &nash, &qne, *sweep_size)?
            }
            AlgorithmSpec::Rqr { iterations, phase1_iterations, phase2_iterations, fixed_p } => {
                let mut cfg = RqrConfig::new(
                    phase1_iterations.unwrap_or(*iterations),
                    phase2_iterations.unwrap_or(*iterations),
                    self.seed_for(&p.instance, 0),
                )
                .with_game_value(p.v().unwrap_or(0.0));
                cfg.fixed_p = *fixed_p;
                cfg.trace_every = self.config.trace_every;
                solve_rqr(game, &model, &cfg)?
            }
            AlgorithmSpec::Ga { config } => {
                let mut cfg = config.clone();
                cfg.seed = self.seed_for(&p.instance, config.seed);
                cfg.record_trace |= self.config.trace_every > 0;
                solve_qse_ga(game, &model, &cfg, None)?
            }
            AlgorithmSpec::BestNe { config } => {
                let Some(nfg) = game.as_normal() else {
                    bail!("best_ne needs a matrix game, {} is a tree", p.instance.id);
                };
                let Some(value) = p.value else {
                    bail!("best_ne needs a zero-sum game, {} is general-sum", p.instance.id);
                };
                let mut cfg = config.clone();
                cfg.seed = self.seed_for(&p.instance, config.seed);
                cfg.record_trace |= self.config.trace_every > 0;
                let nash = solve_nash(game, &RegretConfig::new(cfg.nash_iterations))?.strategy;
                best_ne_search(nfg, &model, &cfg, &value, &nash)?
            }
            AlgorithmSpec::Load { dir, source } => {
                let file = output::read_strategy(&output::strategy_path(dir, &p.instance.id, source))?;
                if file.game_id != p.instance.id {
                    bail!("strategy file belongs to {}, not {}", file.game_id, p.instance.id);
                }
                game.check_strategy(Player::Leader, &file.strategy)?;
                SolveReport {
                    algorithm: spec.label(),
                    final_strategy: file.strategy.clone(),
                    strategy: file.strategy,
                    iterations: file.iterations,
                    tuned_param: file.tuned_param,
                    ..SolveReport::default()
                }
            }
        };
        report.algorithm = spec.label();
        Ok(report)
    }

    fn row(&self, p: &Prepared, algorithm: &str, lambda: Option<f64>, report: &SolveReport, e: &Evaluation) -> ResultRow {
        ResultRow {
            game_id: p.instance.id.clone(),
            family: p.instance.family.clone(),
            seed: p.instance.seed,
            algorithm: algorithm.into(),
            lambda,
            iterations: report.iterations,
            gain: e.gain,
            exploitability: e.exploitability,
            eu_vs_qr: e.eu_vs_qr,
            eu_vs_br: e.eu_vs_br,
            tuned_param: report.tuned_param,
            wall_ms: self.timing.then_some(report.wall_time.as_secs_f64() * 1e3),
        }
    }

    fn jobs<'a>(&'a self, games: &'a [Prepared]) -> Vec<(&'a Prepared, &'a AlgorithmSpec)> {
        games.iter().flat_map(|g| self.config.algorithms.iter().map(move |a| (g, a))).collect()
    }

    /// Solves every (game, algorithm) pair and writes results, values,
    /// strategies and traces under the output directory.
    pub fn solve(&self) -> Result<Vec<ResultRow>> {
        self.config.validate(true)?;
        let pool = self.pool()?;
        let games = self.prepare(&pool)?;
        let jobs = self.jobs(&games);
        let reports: Vec<Result<SolveReport>> = pool.install(|| {
            jobs.par_iter()
                .map(|(g, a)| {
                    let mut r = self
                        .run_algorithm(g, a)
                        .with_context(|| format!("{} on {}", a.label(), g.instance.id))?;
                    r.evaluate(&g.instance.game, &self.config.model, g.v())?;
                    Ok(r)
                })
                .collect()
        });
        let mut rows = Vec::with_capacity(jobs.len());
        for ((g, a), report) in jobs.iter().zip(reports) {
            let report = report?;
            let label = a.label();
            let e = report.evaluation.expect("evaluated above");
            rows.push(self.row(g, &label, self.config.model.lambda(), &report, &e));
            if !matches!(a, AlgorithmSpec::Load { .. }) {
                let file = StrategyFile {
                    game_id: g.instance.id.clone(),
                    algorithm: label.clone(),
                    iterations: report.iterations,
                    tuned_param: report.tuned_param,
                    strategy: report.strategy.clone(),
                    notes: report.notes.clone(),
                };
                output::write_strategy(&output::strategy_path(&self.out, &g.instance.id, &label), &file)?;
            }
            let trace_path = self.out.join("traces").join(format!("{}__{label}.csv", g.instance.id));
            if !report.ga_trace.is_empty() {
                output::write_ga_trace(&trace_path, &report.ga_trace)?;
            } else if !report.trace.is_empty() {
                output::write_trace(&trace_path, &report.trace, g.v(), self.timing)?;
            }
        }
        self.write_values(&games)?;
        output::write_results(&self.out.join("results.csv"), &rows)?;
        Ok(rows)
    }

    fn write_values(&self, games: &[Prepared]) -> Result<()> {
        let values: Vec<(String, GameValue)> =
            games.iter().filter_map(|g| g.value.map(|v| (g.instance.id.clone(), v))).collect();
        output::write_values(&self.out.join("values.csv"), &values)
    }

    /// Solves each pair once and evaluates it against logit followers of
    /// every configured rationality.
    pub fn sweep_lambda(&self) -> Result<Vec<ResultRow>> {
        self.config.validate(true)?;
        let pool = self.pool()?;
        let games = self.prepare(&pool)?;
        let jobs = self.jobs(&games);
        let lambdas = &self.config.lambdas;
        let results: Vec<Result<Vec<ResultRow>>> = pool.install(|| {
            jobs.par_iter()
                .map(|(g, a)| {
                    let label = a.label();
                    let report = self
                        .run_algorithm(g, a)
                        .with_context(|| format!("{label} on {}", g.instance.id))?;
                    let named = [(label.clone(), report.strategy.clone())];
                    let sweep = metrics::lambda_sweep(&g.instance.game, &named, lambdas, g.v())?;
                    Ok(sweep.iter().map(|s| self.row(g, &label, Some(s.lambda), &report, &s.evaluation)).collect())
                })
                .collect()
        });
        let mut rows = Vec::new();
        for r in results {
            rows.extend(r?);
        }
        self.write_values(&games)?;
        output::write_results(&self.out.join("sweep_lambda.csv"), &rows)?;
        Ok(rows)
    }

    /// Gain and exploitability along the fixed-probability RQR family and
    /// the COMB mixtures. `p = 0` is CFR-BR and `p = 1` is the QNE run;
    /// `alpha = 0` is the Nash strategy and `alpha = 1` the QNE strategy.
    pub fn p_profile(&self) -> Result<Vec<ResultRow>> {
        self.config.validate(false)?;
        let pool = self.pool()?;
        let games = self.prepare(&pool)?;
        let n = self.config.profile_iterations;
        let grid = &self.config.p_grid;
        let model = self.config.training_model();
        let lambda = self.config.model.lambda();

        enum Job<'a> {
            Rqr(&'a Prepared, f64),
            Comb(&'a Prepared),
        }
        let mut jobs = Vec::new();
        for g in &games {
            jobs.extend(grid.iter().map(|&p| Job::Rqr(g, p)));
            jobs.push(Job::Comb(g));
        }
        let results: Vec<Result<Vec<ResultRow>>> = pool.install(|| {
            jobs.par_iter()
                .map(|job| match *job {
                    Job::Rqr(g, p) => {
                        let cfg = RqrConfig::new(n, n, self.seed_for(&g.instance, 0)).with_fixed_p(p);
                        let mut report = solve_rqr(&g.instance.game, &model, &cfg)
                            .with_context(|| format!("rqr with p = {p} on {}", g.instance.id))?;
                        report.tuned_param = Some(p);
                        report.evaluate(&g.instance.game, &self.config.model, g.v())?;
                        Ok(vec![self.row(g, "rqr", lambda, &report, &report.evaluation.unwrap())])
                    }
                    Job::Comb(g) => {
                        let game = &g.instance.game;
                        let cfg = RegretConfig::new(n);
                        let nash = solve_nash(game, &cfg)?;
                        let qne = solve_qne(game, &model, &cfg)?;
                        grid.iter()
                            .map(|&alpha| {
                                let s = combine(game, &qne.strategy, &nash.strategy, alpha)?;
                                let e = metrics::evaluate(game, &s, &self.config.model, g.v())?;
                                let report = SolveReport {
                                    iterations: n,
                                    tuned_param: Some(alpha),
                                    wall_time: nash.wall_time + qne.wall_time,
                                    ..SolveReport::default()
                                };
                                Ok(self.row(g, "comb", lambda, &report, &e))
                            })
                            .collect()
                    }
                })
                .collect()
        });
        let mut rows = Vec::new();
        for r in results {
            rows.extend(r?);
        }
        self.write_values(&games)?;
        output::write_results(&self.out.join("p_profile.csv"), &rows)?;
        Ok(rows)
    }

    /// Writes every configured game as `games/{id}.json`.
    pub fn generate(&self) -> Result<Vec<PathBuf>> {
        self.config.validate(false)?;
        let games = self.config.instances()?;
        let mut paths = Vec::with_capacity(games.len());
        for g in &games {
            let path = self.out.join("games").join(format!("{}.json", g.id));
            output::write_json(&path, &(g.game.to_json()? + "\n"))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// Outcome of checking one game.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub error: Option<String>,
}

/// Checks that a game survives a JSON round trip unchanged and that a
/// uniform profile has finite utilities.
pub fn check_game(game: &Game) -> Result<()> {
    let back = Game::from_json(&game.to_json()?)?;
    if &back != game {
        bail!("JSON round trip changed the game");
    }
    let u = game.expected_utility(&game.uniform_strategy(Player::Leader), &game.uniform_strategy(Player::Follower))?;
    if !u.iter().all(|x| x.is_finite()) {
        bail!("uniform profile has non-finite utility");
    }
    if game.is_zero_sum() && (u[0] + u[1]).abs() > 1e-9 * game.payoff_scale().max(1.0) {
        bail!("zero-sum game whose utilities do not cancel");
    }
    Ok(())
}

/// Validates the games of a configuration.
pub fn validate_config(config: &ExperimentConfig) -> Result<Vec<Check>> {
    config.validate(false)?;
    let games = config.instances()?;
    Ok(games
        .iter()
        .map(|g| Check { name: g.id.clone(), error: check_game(&g.game).err().map(|e| format!("{e:#}")) })
        .collect())
}

/// Validates every `*.json` game file of a directory, in name order.
pub fn validate_dir(dir: &Path) -> Result<Vec<Check>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    Ok(paths
        .iter()
        .map(|p| {
            let result = std::fs::read_to_string(p)
                .map_err(anyhow::Error::from)
                .and_then(|t| Ok(Game::from_json(&t)?))
                .and_then(|g| check_game(&g));
            Check { name: p.display().to_string(), error: result.err().map(|e| format!("{e:#}")) }
        })
        .collect())
}
