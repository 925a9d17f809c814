//! File formats, configuration and the `hashreuse` command-line tool built
//! on `hashreuse-core`.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, bad config, bad
//! parameter values), 2 on data errors (unreadable or malformed inputs,
//! unknown users, nothing to evaluate).

use std::ffi::OsString;

use clap::{CommandFactory, Parser};

pub mod cli;
pub mod commands;
pub mod config;
pub mod io;
pub mod output;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<io::LoadError> for CliError {
    fn from(e: io::LoadError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match cli::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match commands::execute(parsed) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("\n{}", cli::Cli::command().render_usage());
            }
            e.exit_code()
        }
    }
}
