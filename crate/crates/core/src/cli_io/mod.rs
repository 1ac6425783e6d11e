//! Command-line front end: configuration parsing, CSV and JSON output.

mod commands;
mod config;
mod csv;
mod report;

pub use commands::{cli_main, EXIT_CONFIG, EXIT_GATE, EXIT_OK, EXIT_RUNTIME};
pub use config::{parse_config, FieldConfig, OutputConfig, RunConfig, PAPER_PRESET};
pub use csv::{
    drift_csv, error_csv, fmt_g17, read_slow_series, trajectory_csv, write_atomic, DRIFT_HEADER,
    ERROR_HEADER, SIMULATE_HEADER,
};
pub use report::{ErrorReport, RunSummary};
