//! Library backing the `esl` binary: config parsing, tabulated candidates,
//! canonical report rendering, and the four subcommand drivers.

#![forbid(unsafe_code)]

pub mod commands;
pub mod config;
pub mod report;
pub mod table;

use thiserror::Error;

/// Errors split by stage so the process exit code tells callers whether the
/// run was misconfigured (2) or failed while computing (3). Honest negative
/// findings (a bound exceeded, a check that fails) are not errors; they exit
/// with code 1 and still produce a full report.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("compute error: {0}")]
    Compute(String),
}

impl CliError {
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
        }
    }

    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn compute(e: impl std::fmt::Display) -> Self {
        CliError::Compute(e.to_string())
    }
}

/// Whether a completed run found everything in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// All comparisons passed; exit code 0.
    Success,
    /// The run completed but a verdict or check came out negative; exit code 1.
    Finding,
}
