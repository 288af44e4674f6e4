//! Command-line front end: configuration, subcommands and byte-stable output files.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

pub use commands::{EXIT_CLAIM_FAILURE, EXIT_PASS, EXIT_USAGE};
pub use config::{Format, Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] transcrit::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// Every error the front end reports is a usage or validation error.
    pub fn exit_code(&self) -> u8 {
        EXIT_USAGE
    }
}
