//! `tg`: command-line access to ball integrals, conditional moments, eta
//! coefficients, figure data and verification suites.
//!
//! Exit codes: 0 success, 1 verification with failing checks, 2 usage error,
//! 3 numeric failure.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl From<truncgauss::Error> for CliError {
    fn from(e: truncgauss::Error) -> Self {
        match e {
            truncgauss::Error::Domain(_) => CliError::Usage(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("TG_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("TG_THREADS must be a positive integer, got '{text}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Integral(a) => commands::integral(a).map(|_| true),
        Command::Moments(a) => commands::moments(a).map(|_| true),
        Command::Eta(a) => commands::eta(a).map(|_| true),
        Command::Figure(a) => commands::figure(a).map(|_| true),
        Command::CpTable(a) => commands::cp(a).map(|_| true),
        Command::Verify(a) => commands::verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("tg: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
