//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or model was constructed with invalid parameters.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was evaluated outside its domain (e.g. pdf at x <= 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// The proposal does not dominate the target anywhere we can certify:
    /// the density ratio (or a categorical probability ratio) is unbounded.
    #[error("unbounded rejection ratio: {0}")]
    UnboundedRatio(String),

    /// Two sample sets or distributions have incompatible shapes.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An enumeration or exhaustive computation exceeds its size guard.
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    /// An experiment configuration is inconsistent or incomplete.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach sampling-round context to an error bubbling out of the
    /// speculative loop.
    pub fn with_round(self, round: usize) -> Error {
        match self {
            Error::UnboundedRatio(msg) => Error::UnboundedRatio(format!("round {round}: {msg}")),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
