use oem_core::OemError;
use thiserror::Error;

/// CLI-level failures, each mapped to a process exit code:
/// 1 usage, 2 data, 3 numerical.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("missing response column '{name}'; available columns: {available}")]
    MissingResponse { name: String, available: String },

    #[error("no data rows")]
    NoDataRows,

    #[error("row {row}, column '{column}': cannot parse '{value}' as a number")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column '{column}': non-finite value")]
    NonFiniteCell { row: usize, column: String },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("column '{name}' has zero norm")]
    ZeroColumn { name: String },

    #[error("{0}")]
    BadRequest(String),

    #[error("fit at lambda={lambda} did not converge")]
    NotConverged { lambda: f64 },

    #[error(transparent)]
    Core(#[from] OemError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadRequest(_) => 1,
            CliError::Io { .. }
            | CliError::MissingResponse { .. }
            | CliError::NoDataRows
            | CliError::NonNumericCell { .. }
            | CliError::NonFiniteCell { .. }
            | CliError::RaggedRow { .. }
            | CliError::ZeroColumn { .. } => 2,
            CliError::NotConverged { .. } => 3,
            CliError::Core(inner) => match inner {
                OemError::InvalidPenalty(_)
                | OemError::InvalidParameter(_)
                | OemError::DimensionMismatch(_) => 1,
                OemError::ShapeMismatch { .. }
                | OemError::NonFiniteEntry { .. }
                | OemError::ZeroColumn(_)
                | OemError::ZeroVector => 2,
                OemError::NotSymmetric
                | OemError::EigenFailed
                | OemError::PowerMethodStalled { .. }
                | OemError::GarroteInfeasible { .. } => 3,
            },
        }
    }
}
