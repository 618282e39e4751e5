//! Configuration files and the command-line driver.

mod config;
mod run;

pub use config::{parse_config, Bandwidth, ConfigErrors, ConfigIssue, ExperimentConfig, Mode};
pub use run::{
    compute_row, compute_rows, load_config, measured_slopes, MeasuredSlope, metadata_path, rows_to_csv, run, verify_table, verify_to_csv, Row,
    RunError, RunOptions, RunReport, CSV_HEADER, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OK, VERIFY_HEADER,
};
