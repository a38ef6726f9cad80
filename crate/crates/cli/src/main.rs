//! `carnot-gap`: groups, quasi-norms, condition checks and spectral gaps
//! from the command line.
//!
//! Exit codes: 0 success, 1 verdict failed, 2 usage or input error,
//! 3 numeric failure.

mod args;
mod commands;
mod output;

use std::path::Path;
use std::process::ExitCode;

use carnot_core::CarnotError;
use clap::Parser;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Usage(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<CarnotError> for CliError {
    fn from(e: CarnotError) -> Self {
        match e {
            CarnotError::NonFinite { .. }
            | CarnotError::DictionaryDegenerate { .. }
            | CarnotError::Domain(_) => CliError::Numeric(e.to_string()),
            CarnotError::Internal(_) => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_env("CARNOT_GAP_LOG")
        .target(env_logger::Target::Stderr)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the worker pool: {e}");
        }
    }
    let result = match &cli.command {
        Command::Catalog(a) => commands::catalog(a),
        Command::Validate(a) => commands::validate(a),
        Command::GradCheck(a) => commands::grad_check(a),
        Command::CheckCondition(a) => commands::check_condition(a),
        Command::Sample(a) => commands::sample(a),
        Command::UboundFit(a) => commands::ubound_fit(a),
        Command::EstimateGap(a) => commands::estimate_gap(a),
        Command::PoincareRatio(a) => commands::poincare_ratio(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(commands::Status::Success) => ExitCode::SUCCESS,
        Ok(commands::Status::VerdictFailed(why)) => {
            eprintln!("verdict: {why}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
