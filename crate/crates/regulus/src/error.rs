//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum RegulusError {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A required constraint (e.g. membership in Σ¹ or Λ̂) is violated.
    #[error("constraint error: {0}")]
    Constraint(String),
    /// A coordinate chart is singular at the requested point.
    #[error("chart error: {0}")]
    Chart(String),
    /// Too close to a singular set of the flow or transform.
    #[error("singular: {0}")]
    Singular(String),
    /// Billiard event with tangential incidence; orbit truncated.
    #[error("grazing reflection at t={t}: {msg}")]
    Grazing { t: f64, msg: String },
    /// Two walls met within the event tolerance.
    #[error("corner event at t={t}: walls {w1} and {w2}")]
    Corner { t: f64, w1: usize, w2: usize },
    /// An iterative numerical procedure failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Invalid user-facing configuration or request.
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, RegulusError>;
