//! File formats and command-line front end for the `a2rl-core` crop agent.
//!
//! Images are binary Netpbm files (P5 graymaps, P6 pixmaps). Checkpoints,
//! training logs, annotation files and reports are described in their
//! modules. [`commands`] holds the logic behind each subcommand so it can be
//! driven without spawning a process.

pub mod annotations;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod fsio;
pub mod pnm;
pub mod report;

use thiserror::Error;

/// Command failure, carrying the process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("numeric abort: {0}")]
    Numeric(String),
    #[error("checkpoint mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl From<a2rl_core::Error> for CliError {
    fn from(e: a2rl_core::Error) -> Self {
        match e {
            a2rl_core::Error::NonFinite { .. } => CliError::Numeric(e.to_string()),
            a2rl_core::Error::Config(_) => CliError::Config(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}
