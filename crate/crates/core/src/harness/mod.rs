//! Monte Carlo experiment harness: configuration, the replication runner,
//! kernel density estimation, and CSV emission.

pub mod config;
pub mod kde;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, Method};
pub use kde::{kde, padded_grid, silverman_bandwidth};
pub use output::emit_outputs;
pub use runner::{
    averaged_bootstrap_distribution, run_experiment, run_experiment_with_threads, CellResult,
    ExperimentResult, Panel, Profile, TableRow,
};
