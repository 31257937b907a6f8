//! Command-line runner for `nhspec-core`: spectra, eigenstates, phase
//! diagrams, IPR scaling tables and the invariant verification suite.

pub mod config;
pub mod output;
pub mod runner;
pub mod verify;

use thiserror::Error;

pub use config::{Cli, Command, FileConfig, Flags, Format, Grid, ModelKind, RunConfig};
pub use runner::{execute, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(nhspec_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<nhspec_core::Error> for CliError {
    fn from(e: nhspec_core::Error) -> Self {
        use nhspec_core::Error as E;
        match e {
            E::SizeTooSmall { .. }
            | E::NonPositiveCoupling { .. }
            | E::NonFinite { .. }
            | E::WrongVariant { .. }
            | E::InvalidTolerance(_)
            | E::SizeNotMultipleOfFour(_)
            | E::InvalidGrid(_)
            | E::MatrixTooLarge { .. } => CliError::Config(e.to_string()),
            other => CliError::Compute(other),
        }
    }
}

pub const EXIT_SUCCESS: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_COMPUTE: u8 = 3;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_COMPUTE,
        }
    }
}
