use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix not positive definite at step {step} (pivot {pivot})")]
    NotPositiveDefinite { step: usize, pivot: usize },

    #[error("degenerate selection: {0}")]
    DegenerateSelection(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The observed data do not satisfy their own selection event; signals a replay bug.
    #[error("inconsistent selection event: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
