use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid parameters or registry setup.
    #[error("configuration error: {0}")]
    Config(String),

    /// A photon would exceed the configured per-state photon cap.
    #[error("photon cap of {cap} exceeded")]
    Capacity { cap: u8 },

    /// An operation was handed inputs that violate its contract.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("{message}, line {line}")]
    Parse { line: usize, message: String },

    /// Not enough counts to support the requested estimate.
    #[error("statistics error: {0}")]
    Statistics(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
