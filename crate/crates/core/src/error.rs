use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// Design, infection vector and outcomes do not agree with each other.
    #[error("inconsistent instance: {0}")]
    Consistency(String),
    /// The request is well-formed but too large to carry out exactly.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// A malformed instance file.
    #[error("instance format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
