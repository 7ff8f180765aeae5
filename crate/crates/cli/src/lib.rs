//! Data ingestion, lambda-path sweeps, and report rendering behind the `oem`
//! binary.

pub mod dataset;
pub mod error;
pub mod path;
pub mod report;

pub use dataset::{load_dataset, load_matrix, Dataset};
pub use error::CliError;
pub use path::{run_path, PathRequest, PathResult, PathStep};
