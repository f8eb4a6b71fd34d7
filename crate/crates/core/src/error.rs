use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or out-of-range input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Effects do not carry the block structure of a covariant observable.
    #[error("not a covariant structure: {0}")]
    NotCovariantStructure(String),
    /// A perturbation certificate violates its defining constraints.
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    /// Two independent computations disagree beyond tolerance.
    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
