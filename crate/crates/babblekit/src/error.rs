//! Crate-wide error type.

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension `{dim}`: value {value} outside range [{min}, {max}]")]
    RangeViolation {
        dim: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("target has {got} values but space has {want} dimensions")]
    SpaceMismatch { got: usize, want: usize },

    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("audio error: {0}")]
    Audio(String),

    #[error("synthesis produced non-finite output at sample {0}")]
    Instability(usize),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("prototype bank error: {0}")]
    Bank(String),

    #[error("optimizer error: {0}")]
    Optimizer(String),

    #[error("exploration pass exhausted: {0}")]
    PassExhausted(String),

    #[error("statistics error: {0}")]
    Stats(String),

    #[error("external synthesizer error: {0}")]
    External(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
