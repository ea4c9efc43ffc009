//! Experiment driver for the lens-array DoA bounds: JSON configuration,
//! bound sweeps and Monte Carlo campaigns written as CSV, the randomized
//! invariant suite behind `check`, and a dependency-free SVG plotter.

pub mod check;
pub mod config;
pub mod error;
pub mod format;
pub mod montecarlo;
pub mod plot;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
