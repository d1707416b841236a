use alloc::string::String;

/// Usage errors raised by the core API.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("population is empty")]
    EmptyPopulation,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown algorithm `{given}`; valid options: {valid}")]
    UnknownAlgorithm { given: String, valid: String },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
