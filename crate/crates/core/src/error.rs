//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad ids or malformed arguments.
    #[error("usage error: {0}")]
    Usage(String),

    /// Argument outside the domain of the operation (non-positive epsilon, A <= 1, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation requires a different kind of metric space.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Input data failed metric or format validation.
    #[error("validation error: {0}")]
    Validation(String),

    /// The net graph could not be connected with the allowed connection radius.
    #[error(
        "disconnected input: components containing {first} and {second} are {gap} apart \
         (connection radius {threshold})"
    )]
    Disconnected {
        first: usize,
        second: usize,
        gap: f64,
        threshold: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Domain(_) => "domain",
            Error::Unsupported(_) => "unsupported",
            Error::Validation(_) => "validation",
            Error::Disconnected { .. } => "disconnected",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
