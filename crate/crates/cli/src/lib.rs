//! Configuration-driven workflows behind the `adaptnet` binary.

pub mod commands;
pub mod config;

pub use commands::{bounds, converge, simulate, verify, Outcome};
pub use config::{Overrides, RunConfig};

/// Exit status for a run whose checks all passed.
pub const EXIT_PASS: u8 = 0;
/// Exit status for configuration or input errors.
pub const EXIT_INVALID: u8 = 1;
/// Exit status for a failed check.
pub const EXIT_CHECK_FAILED: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] adaptnet::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use adaptnet::Error as E;
        match self {
            CliError::Core(E::NonContraction { .. } | E::AssumptionsFailed(_) | E::BlowUp { .. }) => EXIT_CHECK_FAILED,
            _ => EXIT_INVALID,
        }
    }
}
