use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric domain error at n = {n}: {detail}")]
    NumericDomain { n: u64, detail: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("invalid input at n = {n}: {detail}")]
    InvalidInput { n: u64, detail: String },

    #[error("unknown rule: {0}")]
    UnknownRule(String),

    #[error("resource error: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
