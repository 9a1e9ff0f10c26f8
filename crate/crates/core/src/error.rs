use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("operator cannot be normalized (trace {trace:e})")]
    NonNormalizable { trace: f64 },

    #[error("trace is not 1 (got {trace})")]
    TraceViolation { trace: f64 },

    #[error("operator is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    Negativity { min_eigenvalue: f64 },

    #[error("record {index}: count {count} is not a finite non-negative number")]
    InvalidCount { index: usize, count: f64 },

    #[error("total {total} does not match the sum of counts {sum}")]
    TotalMismatch { total: f64, sum: f64 },

    #[error("dataset has no positive counts")]
    NoPositiveCounts,

    #[error("dataset has no records")]
    EmptyDataset,

    #[error("cannot build a projector from a zero vector")]
    ZeroVector,

    #[error("G operator is singular (condition estimate {condition:e})")]
    SingularG { condition: f64 },

    #[error("POVM does not sum to the identity (max deviation {deviation:e})")]
    IncompletePovm { deviation: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("no samples supplied")]
    EmptySamples,
}
