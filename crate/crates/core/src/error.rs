use thiserror::Error;

/// Errors produced by the solver and its supporting linear algebra.
#[derive(Debug, Clone, Error)]
pub enum OemError {
    #[error("data length {len} does not match a {rows}x{cols} matrix")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column {0} has zero norm")]
    ZeroColumn(usize),

    #[error("initial vector must be nonzero")]
    ZeroVector,

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("eigendecomposition did not converge")]
    EigenFailed,

    #[error("power method stalled after {iterations} iterations (best estimate {estimate})")]
    PowerMethodStalled { estimate: f64, iterations: usize },

    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("garrote sign constraint violated at coordinate {index}")]
    GarroteInfeasible { index: usize },
}

pub type Result<T> = std::result::Result<T, OemError>;
