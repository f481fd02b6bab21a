use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector is not normalized: |<psi,psi> - 1| = {deviation:e}")]
    NotUnit { deviation: f64 },

    #[error("matrix is not Hermitian: max |A_ij - conj(A_ji)| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty vector or matrix")]
    Empty,

    #[error("states are parallel (theta = 0) and cannot be discriminated")]
    ParallelStates,

    #[error("states are orthogonal: the bound tan(theta) is infinite")]
    BoundInfinite,

    #[error("alpha = {alpha} outside saturating range [{lower}, {upper}]")]
    OutsideSaturatingRange { alpha: f64, lower: f64, upper: f64 },

    #[error("trivial case: total uncertainty {total:e} does not exceed tolerance")]
    TrivialCase { total: f64 },

    #[error("distributions indistinguishable by mean")]
    IndistinguishableByMean,

    #[error("degenerate distributions: zero total deviation")]
    Degenerate,

    #[error("discernability undefined: both states are eigenvectors with a common eigenvalue")]
    UndefinedDiscernability,

    #[error("eigenvalue {0} has no label in the assignment")]
    UnmappedEigenvalue(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
