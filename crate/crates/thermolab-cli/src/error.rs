//! Failures of a command-line run and their exit codes.

use thiserror::Error;

/// Failure of a command-line run.
#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration does not match the subcommand schema.
    #[error("schema violation: {0}")]
    Schema(String),
    /// The run exceeds a resource budget.
    #[error("resource limit: {0}")]
    Resource(String),
    /// Replayed outputs differ from the manifest.
    #[error("replay mismatch: {0}")]
    Mismatch(String),
    /// Filesystem or serialization failure.
    #[error("i/o error: {0}")]
    Io(String),
    /// Numerical failure inside the library.
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    /// Process exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Schema(_) => 2,
            Self::Resource(_) => 3,
            Self::Mismatch(_) | Self::Io(_) | Self::Compute(_) => 1,
        }
    }
}

impl From<thermolab::Error> for CliError {
    fn from(e: thermolab::Error) -> Self {
        use thermolab::Error as E;
        match e {
            E::Resource(m) => Self::Resource(m),
            E::Config(_) | E::InfeasibleSubspace(_) | E::Dimension(_) => Self::Schema(e.to_string()),
            other => Self::Compute(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(e.to_string())
    }
}

/// Result alias for the driver.
pub type CliResult<T> = std::result::Result<T, CliError>;
