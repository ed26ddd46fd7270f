//! Solvers for two-player games against a boundedly rational opponent.
//!
//! The leader is perfectly rational; the follower plays a quantal response.
//! The crate covers game representations, response oracles, regret-based
//! solvers, gradient ascent on the commitment objective, evaluation metrics
//! and a zoo of benchmark games.

pub mod error;
pub mod game;
pub mod metrics;
pub mod qse;
pub mod quantal;
pub mod regret;
pub mod simplex;
pub mod zoo;

pub use error::{Error, Result};
pub use game::{
    BehavioralStrategy, EfgBuilder, ExtensiveFormGame, Game, NormalFormGame, Player, RealizationPlan,
};
pub use metrics::{Evaluation, GameValue};
pub use qse::GaConfig;
pub use quantal::{Generator, QuantalModel};
pub use regret::{RegretConfig, RqrConfig, SolveReport};
