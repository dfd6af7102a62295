use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the validity domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid quantum numbers (n={n}, l={l}, m={m}): require n >= 1, l <= n-1, |m| <= l")]
    InvalidQuantumNumbers { n: u32, l: u32, m: i32 },

    /// Adaptive integration exhausted its subdivision budget.
    #[error(
        "{context}: quadrature did not converge (value {value:e}, error estimate {error_estimate:e}, tolerance {tolerance:e}, {evaluations} evaluations)"
    )]
    NotConverged {
        context: String,
        value: f64,
        error_estimate: f64,
        tolerance: f64,
        evaluations: usize,
    },

    #[error("non-finite Monte Carlo sample at {coordinates}")]
    NonFiniteSample { coordinates: String },

    /// Any other numerical failure, with a human-readable diagnostic.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures caused by invalid input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::InvalidQuantumNumbers { .. })
    }
}
