use thiserror::Error;

/// Errors produced by game construction, evaluation and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("strategy does not match the game: {0}")]
    Domain(String),
    #[error("invalid quantal model: {0}")]
    InvalidModel(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0} requires a zero-sum game")]
    NotZeroSum(&'static str),
    #[error("{0} is only defined for {1} games")]
    Unsupported(&'static str, &'static str),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
