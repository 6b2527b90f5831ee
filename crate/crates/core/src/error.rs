//! Crate-wide error type.
//!
//! Two broad classes matter to callers: precondition violations (bad
//! arguments, rejected before any numerics run) and numerical failures
//! (poles, divergence, non-convergence, out-of-domain results discovered
//! while computing). The CLI maps the former to exit code 1 and the latter
//! to exit code 2.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Arguments violate a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested evaluation point lies outside the convergence domain.
    #[error("out of domain: {0}")]
    Domain(String),

    /// A pole of the underlying formula was hit.
    #[error("pole: {0}")]
    Pole(String),

    /// A series recursion hit a vanishing denominator (root-of-unity q).
    #[error("resonance: {0}")]
    Resonance(String),

    /// Series or marching blew up before reaching the requested order/range.
    #[error("divergence: {0}")]
    Divergence(String),

    /// An iterative solver failed to converge.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// Requested value lies outside the stored grid; extrapolation is refused.
    #[error("interpolation out of range: {0}")]
    Interpolation(String),
}

impl Error {
    /// Whether this error is a precondition violation (as opposed to a
    /// numerical failure discovered during evaluation).
    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::InvalidInput(_))
    }
}
