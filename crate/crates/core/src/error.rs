use thiserror::Error;

/// Errors raised by vector algebra, optimizers, problems and checkers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero denominator at index {index}")]
    ZeroDenominator { index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("premise violated: {0}")]
    Premise(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
