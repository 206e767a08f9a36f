//! Command-line harness: run a benchmark problem with LVIM, compare it with
//! the Dormand-Prince reference, check the collocation operators, and
//! produce parameter sweeps as CSV.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod report;
pub mod sweep;

pub use args::{Cli, Command};
pub use report::{Format, RunReport, Table};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NO_CONVERGENCE: i32 = 2;
    pub const THRESHOLD: i32 = 3;
    pub const SELF_TEST: i32 = 4;
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Solver(lvim::Error),
    Io(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => exit::USAGE,
            CliError::Solver(e) => match e.root() {
                lvim::Error::NoConvergence { .. }
                | lvim::Error::DomainViolation { .. }
                | lvim::Error::NumericallySingularBasis { .. } => exit::NO_CONVERGENCE,
                _ => exit::USAGE,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Solver(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<lvim::Error> for CliError {
    fn from(e: lvim::Error) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `stdout` unless `--out` is given; diagnostics
/// go to `stderr`.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not errors
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return exit::USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return exit::SUCCESS;
        }
    };
    match commands::dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
