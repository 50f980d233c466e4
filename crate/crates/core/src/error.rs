use thiserror::Error;

/// Errors produced by the numerical core and the experiment pipelines.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a mathematical precondition (non-finite entries,
    /// a matrix that is not skew-Hermitian, pixels out of range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller broke an API contract: lengths, dimensions or wire indices
    /// that do not line up.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Operand dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown model kind `{0}`")]
    UnknownModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
