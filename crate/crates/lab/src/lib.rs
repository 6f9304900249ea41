//! Experiment runner for `wavemap-core`: JSON configs in, CSV rows, JSON
//! summaries and run manifests out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod run;

pub use config::{Experiment, ExperimentConfig};
pub use error::{LabError, LabResult};
pub use output::Row;
