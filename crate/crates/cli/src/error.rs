use std::fmt;

use layered_ac_core::Error as CoreError;

/// Failure of a command, carrying the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Malformed configuration or arguments.
    Config(String),
    /// A hypothesis on `W` or the (*) / (**) certificate does not hold.
    Certificate(String),
    /// A solver failed to produce a usable result.
    Solver(String),
    /// Reading or writing a file failed.
    Io(String),
    /// An upstream stage is missing, failed, or its outputs are stale.
    Dependency(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Certificate(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) | CliError::Dependency(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Certificate(m) => write!(f, "{m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Dependency(m) => write!(f, "dependency error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(e) => CliError::Io(e.to_string()),
            CoreError::Hypothesis(m) => CliError::Certificate(format!("hypothesis violated: {m}")),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
