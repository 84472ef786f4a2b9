//! Experiment driver for the square-function laboratory: configuration,
//! the built-in catalog, parallel execution, and CSV/JSON artifacts.

pub mod config;
pub mod error;
pub mod experiments;
pub mod runner;
pub mod snapshot;

pub use config::ExperimentConfig;
pub use error::{LabError, Result};
