use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use quantal_cli::run::{self, Check};
use quantal_cli::{Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "quantal", version, about = "Solve and evaluate games against quantal-response followers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write every configured game as JSON.
    Generate(Common),
    /// Run each algorithm on each game.
    Solve(Common),
    /// Evaluate each solution against followers of varying rationality.
    SweepLambda(Common),
    /// Gain and exploitability along fixed mixing probabilities.
    PProfile(Common),
    /// Check configured games or a directory of game files.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Directory of game JSON files to check instead of a config.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the config's `workers`.
    #[arg(long)]
    workers: Option<usize>,
    /// Base seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Fill the wall_ms columns (makes output depend on the machine).
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        match &self.config {
            Some(path) => ExperimentConfig::from_file(path),
            None => bail!("--config is required"),
        }
    }

    fn experiment(&self) -> Result<Experiment> {
        Ok(Experiment::new(self.config()?, self.out.clone(), self.workers, self.seed, self.timing))
    }
}

fn report_checks(checks: &[Check]) -> Result<()> {
    let mut failed = 0;
    for c in checks {
        match &c.error {
            None => println!("ok   {}", c.name),
            Some(e) => {
                failed += 1;
                println!("FAIL {}: {e}", c.name);
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} games failed validation", checks.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(c) => {
            let paths = c.experiment()?.generate()?;
            eprintln!("wrote {} game files", paths.len());
        }
        Command::Solve(c) => {
            let e = c.experiment()?;
            let rows = e.solve()?;
            eprintln!("wrote {} rows to {}", rows.len(), e.out.join("results.csv").display());
        }
        Command::SweepLambda(c) => {
            let e = c.experiment()?;
            let rows = e.sweep_lambda()?;
            eprintln!("wrote {} rows to {}", rows.len(), e.out.join("sweep_lambda.csv").display());
        }
        Command::PProfile(c) => {
            let e = c.experiment()?;
            let rows = e.p_profile()?;
            eprintln!("wrote {} rows to {}", rows.len(), e.out.join("p_profile.csv").display());
        }
        Command::Validate { common, dir } => {
            let checks = match dir {
                Some(d) => run::validate_dir(&d)?,
                None => run::validate_config(&common.config()?)?,
            };
            report_checks(&checks)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
