//! CSV and JSON artifacts.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use quantal_core::metrics::GameValue;
use quantal_core::qse::GaTraceRow;
use quantal_core::regret::TraceRow;
use quantal_core::BehavioralStrategy;
use serde::{Deserialize, Serialize};

pub const RESULTS_HEADER: [&str; 12] = [
    "game_id",
    "family",
    "seed",
    "algorithm",
    "lambda",
    "iterations",
    "gain",
    "exploitability",
    "eu_vs_qr",
    "eu_vs_br",
    "tuned_param",
    "wall_ms",
];

/// One line of `results.csv`, `sweep_lambda.csv` or `p_profile.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub game_id: String,
    pub family: String,
    pub seed: Option<u64>,
    pub algorithm: String,
    pub lambda: Option<f64>,
    pub iterations: usize,
    pub gain: Option<f64>,
    pub exploitability: Option<f64>,
    pub eu_vs_qr: f64,
    pub eu_vs_br: f64,
    pub tuned_param: Option<f64>,
    pub wall_ms: Option<f64>,
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.game_id.clone(),
            self.family.clone(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.algorithm.clone(),
            num(self.lambda),
            self.iterations.to_string(),
            num(self.gain),
            num(self.exploitability),
            self.eu_vs_qr.to_string(),
            self.eu_vs_br.to_string(),
            num(self.tuned_param),
            num(self.wall_ms),
        ]
    }
}

/// Shortest round-trip formatting; missing values are empty fields.
pub fn num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    csv::Writer::from_path(path).with_context(|| format!("opening {}", path.display()))
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_values(path: &Path, values: &[(String, GameValue)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["game_id", "value", "lower", "upper", "gap", "iterations"])?;
    for (id, v) in values {
        w.write_record([
            id.clone(),
            v.value.to_string(),
            v.lower.to_string(),
            v.upper.to_string(),
            v.gap.to_string(),
            v.iterations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Regret-run trace. The gain column needs the game value.
pub fn write_trace(path: &Path, rows: &[TraceRow], value: Option<f64>, timing: bool) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["iter", "p_or_alpha", "gain_current", "epsilon_br", "wall_ms"])?;
    for r in rows {
        let gain = match (r.eu_vs_qr, value) {
            (Some(eu), Some(v)) => Some(eu - v),
            _ => None,
        };
        w.write_record([
            r.iter.to_string(),
            num(r.param),
            num(gain),
            r.epsilon.to_string(),
            num(timing.then_some(r.wall_ms)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ga_trace(path: &Path, rows: &[GaTraceRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["restart_id", "iter", "objective", "step", "grad_norm"])?;
    for r in rows {
        w.write_record([
            r.restart_id.to_string(),
            r.iter.to_string(),
            r.objective.to_string(),
            r.step.to_string(),
            r.grad_norm.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Persisted solver output, enough to recompute every metric.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrategyFile {
    pub game_id: String,
    pub algorithm: String,
    pub iterations: usize,
    pub tuned_param: Option<f64>,
    pub strategy: BehavioralStrategy,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn strategy_path(dir: &Path, game_id: &str, algorithm: &str) -> std::path::PathBuf {
    dir.join("strategies").join(format!("{game_id}__{algorithm}.json"))
}

pub fn write_json(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_strategy(path: &Path, file: &StrategyFile) -> Result<()> {
    write_json(path, &(serde_json::to_string_pretty(file)? + "\n"))
}

pub fn read_strategy(path: &Path) -> Result<StrategyFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing strategy {}", path.display()))
}
