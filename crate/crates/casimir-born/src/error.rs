use thiserror::Error;

/// Errors surfaced by the library. Quadrature non-convergence is *not* an
/// error: it is reported through [`crate::quadrature::QuadResult::converged`]
/// so a partial answer is never silently promoted to a converged one.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of an operation
    /// (non-positive frequency, observation point on a plate face, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A material model failed validation (passivity, monotonicity, ...).
    #[error("invalid material: {0}")]
    Material(String),

    /// Malformed JSON descriptor.
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
