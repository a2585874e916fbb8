//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Operands do not live over the same algebra / module geometry.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// An element or operator that must be invertible is numerically singular.
    #[error("not invertible: factor {factor} has sigma_min = {sigma_min:.3e}")]
    NotInvertible { factor: usize, sigma_min: f64 },

    /// Positivity precondition failed.
    #[error("not positive: {0}")]
    NotPositive(String),

    /// A flat matrix does not match any representable coefficient pattern.
    #[error("pattern error: {0}")]
    Pattern(String),

    /// The frame operator has no invertible lower bound.
    #[error("no lower frame bound: factor {factor} has lambda_min = {lambda_min:.3e}")]
    NoLowerBound { factor: usize, lambda_min: f64 },

    /// Operator is not injective where injectivity is required.
    #[error("not injective: {0}")]
    NotInjective(String),

    /// Operator or homomorphism is not surjective where surjectivity is required.
    #[error("not surjective: {0}")]
    NotSurjective(String),

    /// Candidate frame bounds are structurally unusable.
    #[error("malformed bounds: {0}")]
    MalformedBounds(String),

    /// An iterative numeric routine failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
