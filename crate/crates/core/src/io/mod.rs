//! Data ingestion, model configuration, summaries and report files.

mod config;
mod dataset;
mod report;
mod summary;
pub mod synthetic;

pub use config::ModelConfig;
pub use dataset::{ingest_csv, ingest_reader, Dataset};
pub use report::{fit_report, is_significant, residual_envelope, write_envelope_csv, FitReport};
pub use summary::{summarize_values, Summary};

use crate::error::Result;

/// Summary of a named column.
pub fn summarize(data: &Dataset, column: &str) -> Result<Summary> {
    summarize_values(data.column(column)?)
}
