//! Error types shared across the crate.

use thiserror::Error;

/// Why an action was rejected at some state, and where in a sequence.
#[derive(Debug, Clone, Error)]
#[error("action at position {index} is inadmissible: {reason}")]
pub struct AdmissibilityError {
    /// Index of the first offending element (atomic leg or sequence element,
    /// depending on the operation that produced the error).
    pub index: usize,
    pub reason: String,
}

impl AdmissibilityError {
    pub fn new(index: usize, reason: impl Into<String>) -> Self {
        Self {
            index,
            reason: reason.into(),
        }
    }

    pub fn at_index(self, index: usize) -> Self {
        Self { index, ..self }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Admissibility(#[from] AdmissibilityError),

    #[error("unsupported for pool kind `{kind}`: {what}")]
    Unsupported {
        kind: &'static str,
        what: &'static str,
    },

    #[error("operation requires a frictionless pool")]
    PoolNotFrictionless,

    #[error(
        "competitiveness violation at block {block}: target pool price {target} \
         outside no-arbitrage band [{lo}, {hi}]"
    )]
    CompetitivenessViolation {
        block: usize,
        target: f64,
        lo: f64,
        hi: f64,
    },

    #[error("price path misaligned with block schedule: {0}")]
    PathMismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
