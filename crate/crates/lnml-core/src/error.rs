//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, LnmlError>;

/// Everything that can go wrong when evaluating LNML quantities.
///
/// Messages name the offending field or quantity so they can be surfaced
/// verbatim as CLI diagnostics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LnmlError {
    /// An argument is outside the mathematical domain of the operation
    /// (e.g. `log_gamma` at z ≤ 0, capacity at n = 0).
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector/matrix dimensions disagree between arguments.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A matrix that must be symmetric positive definite is not
    /// (Cholesky factorization failed or symmetry is violated).
    #[error("not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// An input or intermediate value is NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An iterative oracle failed to meet its tolerance within its budget.
    /// Reported, never silently accepted.
    #[error("oracle did not converge: {0}")]
    NoConvergence(String),

    /// A configuration value violates a documented constraint
    /// (e.g. a `QuadratureSpec` window narrower than 10 predictive scales).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
