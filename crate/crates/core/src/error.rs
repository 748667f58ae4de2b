use thiserror::Error;

use crate::state::Space;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid too narrow: truncated tail mass {tail_mass:.3e} exceeds {limit:.0e}")]
    GridTooNarrow { tail_mass: f64, limit: f64 },

    #[error("expected a {expected} space state, found {found}")]
    WrongSpace { expected: Space, found: Space },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("only {available} grid samples inside a bin, need at least {required}")]
    InsufficientSamples { available: usize, required: usize },

    #[error("weight {value:.3e} at index {index} is negative beyond the clamping floor")]
    NegativeWeight { index: usize, value: f64 },

    #[error("distribution weights sum to {sum}, expected 1")]
    BadTotal { sum: f64 },

    #[error("distribution has no positive weight")]
    EmptyDistribution,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
