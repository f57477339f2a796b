//! Command-line front end for `stickygeom-core`: JSON experiment configs in,
//! deterministic CSV or JSON reports out.

pub mod commands;
pub mod config;
pub mod report;

use std::fs;
use std::path::Path;

pub use commands::RunError;
pub use config::{validate, Command, ExperimentConfig, Format, ValidationError};
pub use report::Report;

/// Runs the config's command.
pub fn run(config: &ExperimentConfig) -> Result<Report, RunError> {
    let command = config.command.ok_or_else(|| RunError::usage("no command given"))?;
    commands::execute(config, command)
}

/// Renders a report in the requested format.
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Csv => report.to_csv_string(),
        Format::Json => report.to_json_string(),
    }
}

/// Reads and validates a config file; unreadable files are reported like
/// validation errors.
pub fn load(path: &Path) -> Result<ExperimentConfig, Vec<ValidationError>> {
    let text = fs::read_to_string(path).map_err(|e| {
        vec![ValidationError { pointer: String::new(), message: format!("cannot read {}: {e}", path.display()) }]
    })?;
    validate(&text)
}
