use thiserror::Error;

/// Errors raised by model construction and the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid model or experiment parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller-supplied value is outside the domain of the operation.
    #[error("invalid input: {0}")]
    Input(String),

    /// A numerical routine failed to meet its accuracy contract.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> Error {
    Error::Numerical(msg.into())
}
