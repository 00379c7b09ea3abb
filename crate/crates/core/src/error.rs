use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid exponent literal `{0}`")]
    ParseExponent(String),

    #[error("polynomial exponents must be nonnegative integers, got {0}")]
    NonPolynomialExponent(String),

    #[error("negative coefficient {coef} on positive support point {exponent}")]
    NegativeCoefficient { exponent: String, coef: f64 },

    #[error("coefficient must be finite, got {0}")]
    NonFiniteCoefficient(f64),

    #[error("circuit enumeration budget exceeded: {points} points, cap is {cap}")]
    CircuitBudget { points: usize, cap: usize },

    #[error("{0} is not in the support")]
    NotInSupport(String),

    #[error("input is not invariant under coordinate permutations")]
    NotSymmetric,

    #[error("signomial is not invariant under the stabilizer of {0}")]
    NotStabilizerInvariant(String),

    #[error("exponent {0} has a negative coordinate")]
    NegativeExponent(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
