//! Experiment runner behind the `quantal` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{AlgorithmSpec, ExperimentConfig, GameInstance, GameSpec};
pub use run::Experiment;
