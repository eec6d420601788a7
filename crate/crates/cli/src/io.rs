use std::fs;
use std::path::Path;

use oracle_opt::convex::ConvexError;
use oracle_opt::metric::{parse_id_list, MetricSpace};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::NoConvergence(_) => 3,
        }
    }
}

pub fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

impl From<ConvexError> for CliError {
    fn from(e: ConvexError) -> Self {
        CliError::NoConvergence(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        invalid(e)
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn read_instance(path: &Path) -> Result<MetricSpace, CliError> {
    MetricSpace::from_text(&read_file(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn read_set(path: &Path, n: usize) -> Result<Vec<usize>, CliError> {
    parse_id_list(&read_file(path)?, n).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Writes to `out` when given, otherwise prints to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Fixed six-decimal rendering; NaN becomes an empty field.
pub fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.6}")
    }
}

/// Builds a CSV document from a header and rows of already-formatted fields.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(invalid)
}
