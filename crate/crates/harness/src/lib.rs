//! Experiment runner for `portfolio-bo`: sweeps strategies over a benchmark,
//! aggregates repeated runs and writes CSV, JSON and plot artifacts.

pub mod artifacts;
pub mod config;
mod error;
pub mod experiment;
pub mod report;
pub mod stats;

pub use config::{CellSpec, ExperimentConfig, StrategyName};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, CellStatus, CellSummary, ExperimentSummary, Metadata};
