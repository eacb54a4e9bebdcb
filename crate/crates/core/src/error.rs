use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The local Bloch vector has zero length, so there is no direction to estimate.
    #[error("direction undefined: the local Bloch vector has zero length")]
    DirectionUndefined,
    /// The request exceeds what the dense or exact-integer backends can hold.
    #[error("resource limit: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
