//! Seeded experiment runner behind the `firstocc` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod seeds;

pub use config::{Experiment, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use report::{Report, Series, Table};
