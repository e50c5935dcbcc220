//! Command implementations behind the `ankle` binary.
//!
//! Each command returns a [`CliError`] whose [`CliError::exit_code`] is the
//! process status: 0 success, 1 domain infeasibility, 2 input error.

pub mod args;
mod inspect;
mod optimize;
mod rank;
mod region;
mod validate;

use std::fmt;

pub use inspect::{cmd_ik, cmd_metrics};
pub use optimize::{cmd_optimize, optimize_bundle, OptimizeRequest};
pub use rank::{cmd_rank, cost_groups, evaluate_baseline, rank_bundle, BaselineCost, CostGroup, RankReport};
pub use validate::{cmd_validate, ValidateOutcome};

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "ANKLE_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Valid input without a solution: infeasible designs, unreachable
    /// poses, violated containment.
    Domain(String),
    /// Unreadable, malformed or inconsistent input.
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Input(_) => 2,
        }
    }

    pub(crate) fn input(e: impl fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    pub(crate) fn domain(e: impl fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(m) | CliError::Input(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

/// Sizes the global rayon pool from `ANKLE_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(CliError::input)
}

pub fn run(cli: args::Cli) -> Result<(), CliError> {
    use args::Command;
    match cli.command {
        Command::Optimize(a) => cmd_optimize(&a),
        Command::Rank(a) => cmd_rank(&a),
        Command::Validate(a) => cmd_validate(&a).and_then(|o| o.into_result()),
        Command::Ik(a) => cmd_ik(&a),
        Command::Metrics(a) => cmd_metrics(&a),
    }
}
