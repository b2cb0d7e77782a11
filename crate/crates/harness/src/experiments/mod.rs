//! One protocol per experiment name.

pub mod demos;
pub mod escape;
pub mod exploration;
pub mod fourrooms;
pub mod mountaincar;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::report::Report;

/// Runs the configured protocol and returns its report without writing it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    match config.experiment {
        Experiment::Fig1Demo => demos::run_fig1(config),
        Experiment::Fig3Planning => demos::run_fig3(config),
        Experiment::Exploration => exploration::run(config),
        Experiment::MountainCarFf => mountaincar::run_selection(config),
        Experiment::MountainCarDims => mountaincar::run_dims(config),
        Experiment::FourRooms => fourrooms::run(config),
        Experiment::FourRoomsNoise => fourrooms::run_noise(config),
        Experiment::Escape => escape::run(config),
    }
}

/// Runs the protocol and writes its report into `config.out_dir`.
pub fn run_and_emit(config: &ExperimentConfig) -> Result<Report> {
    let report = run_experiment(config)?;
    report.emit(&config.out_dir)?;
    Ok(report)
}
