use std::process::ExitCode;

mod args;
mod commands;
mod config;
mod output;

use clap::error::ErrorKind;
use clap::Parser;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("missing required option `{0}`")]
    Missing(&'static str),

    #[error("{0}")]
    Core(#[from] halfspace::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn invalid(field: impl Into<String>, reason: impl ToString) -> Self {
        CliError::Invalid {
            field: field.into(),
            reason: reason.to_string(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 2,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error: {line}");
            return ExitCode::from(1);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
