use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frequency set is empty")]
    EmptyFrequencySet,
    #[error("invalid frequency set: {0}")]
    InvalidFrequencies(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("input contains NaN or infinite values")]
    NonFiniteInput,
    #[error("rank {k} out of range for dimension {d}")]
    BadRank { k: usize, d: usize },
    #[error("brute-force search needs d <= {max}, got {d}")]
    TooLargeForBruteForce { d: usize, max: usize },
    #[error("cluster width {width:e} exceeds limit {limit:e}")]
    NotClustered { width: f64, limit: f64 },
    #[error("exponential fit with gamma = {gamma:e} has residual {residual:e} above {tolerance:e}; try a larger gamma")]
    IllConditionedGamma { gamma: f64, residual: f64, tolerance: f64 },
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("exhaustive search would visit {candidates:e} candidate sets (limit {limit:e})")]
    ExplosionGuard { candidates: f64, limit: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
