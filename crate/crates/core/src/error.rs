use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{n} qubits exceeds the limit of {max} for this operation")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("terms act on different qubit counts ({0} vs {1})")]
    MixedQubitCounts(usize, usize),

    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(String),

    #[error("sparsity {k} exceeds matrix dimension {dim}")]
    SparsityTooLarge { k: usize, dim: usize },

    #[error("no snapshot matched the Pauli term")]
    NoMatches,

    #[error("every median-of-means group was empty")]
    AllGroupsEmpty,

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("eigendecomposition failed: {0}")]
    EigensolverFailure(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
