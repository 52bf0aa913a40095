//! Batch front end for heda-core: protocol runs, block benchmarks, key files.

pub mod bench;
pub mod keygen;
pub mod run;

pub use bench::{cmd_bench_blocks, BenchRow};
pub use keygen::{cmd_keygen, KeyKind};
pub use run::{cmd_run, cmd_run_with, execute, transcript_path, RunOutcome, RunSpec};

use heda_core::encoding::BudgetViolation;
use heda_core::Error as CoreError;
use thiserror::Error;

/// Seed override read by `heda run` and `heda keygen`.
pub const SEED_ENV: &str = "HEDA_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),

    #[error("digit budget check failed: {0}")]
    Budget(#[from] BudgetViolation),

    #[error("transcript audit failed:\n{0}")]
    Audit(String),

    #[error(transparent)]
    Core(CoreError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Budget(b) => CliError::Budget(b),
            CoreError::UnsupportedKeySize(_) | CoreError::Config(_) => CliError::Invalid(e.to_string()),
            e => CliError::Core(e),
        }
    }
}

impl CliError {
    /// 2: rejected before launch, 3: audit failure, 1: anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Budget(_) => 2,
            CliError::Audit(_) => 3,
            _ => 1,
        }
    }
}

/// `HEDA_SEED` when set and parseable, else the flag value.
pub fn effective_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map_err(|_| CliError::Invalid(format!("{SEED_ENV}={v:?} is not an unsigned integer")))
        }
        _ => Ok(flag),
    }
}
