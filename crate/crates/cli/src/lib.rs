//! Library surface of the `pqflow` binary: scenario parsing, trace CSV I/O,
//! SVG plotting, the invariant suite and the command entry points.

pub mod checks;
pub mod commands;
pub mod scenario;
pub mod svg;
pub mod trace_io;

use std::fmt;

/// Failures sorted by exit code: parse errors 2, flow failures 3,
/// eigensolver failures 4.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Flow(String),
    Eigen(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Flow(_) => 3,
            CliError::Eigen(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Flow(m) => write!(f, "flow failure: {m}"),
            CliError::Eigen(m) => write!(f, "eigensolver failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
