//! Scenario runner for the conditional photodetection simulator: config
//! files in, figure-ready CSV and density-matrix JSON out.

pub mod compare;
pub mod config;
pub mod error;
pub mod format;
pub mod scenario;
pub mod sweep;

pub use compare::{compare_methods, run_compare, DeviationReport};
pub use config::{parse_config, Initial, ScenarioConfig};
pub use error::CliError;
pub use format::format_g;
pub use scenario::{compute_scenario, run_scenario, Row, ScenarioOutput, Snapshot, Timeseries, CSV_HEADER};
pub use sweep::{run_sweep, sweep_cells};

/// Reads and parses a config file.
pub fn load_config(path: &std::path::Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}
