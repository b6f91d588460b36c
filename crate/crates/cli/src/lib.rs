//! Command-line front end for `hcolor`: file formats and subcommands.

pub mod commands;
pub mod io;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] hcolor::Error),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}: {1}")]
    Io(PathBuf, String),
    #[error("usage: {0}")]
    Usage(String),
}

impl CliError {
    /// 2 for caps and timeouts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(e) => e.exit_code(),
            _ => 1,
        }
    }
}
