//! Library half of the `keyrate` command-line tool: scenario-file parsing,
//! CSV emission, and the subcommand implementations, kept behind a thin
//! `main` so integration tests can drive them directly.

pub mod commands;
pub mod csv_out;
pub mod scenario_file;

use std::fmt;

/// CLI failures, split by exit code: I/O problems exit 1, configuration and
/// validation problems exit 2.
#[derive(Debug)]
pub enum CliError {
    Io { context: String, source: std::io::Error },
    Config { message: String },
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config { message: message.into() }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn from_core(err: keyrate_core::Error) -> Self {
        CliError::Config { message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config { .. } => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { context, source } => write!(f, "{context}: {source}"),
            CliError::Config { message } => write!(f, "{message}"),
        }
    }
}

impl std::error::Error for CliError {}
