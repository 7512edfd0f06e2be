use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The body hull does not bound the separating direction, e.g. every point equals the seed.
    #[error("degenerate body: {0}")]
    DegenerateBody(String),

    /// More than n+1 constraints are tight; only a subgradient is available.
    #[error("degenerate active set, subgradient only: {0}")]
    SubgradientOnly(String),

    #[error("degenerate active set: {0}")]
    DegenerateActiveSet(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
