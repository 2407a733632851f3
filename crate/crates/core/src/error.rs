use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// A density matrix violates hermiticity, normalization or positivity.
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    /// A fit was refused before optimization started.
    #[error("fit rejected: {0}")]
    FitRejected(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
