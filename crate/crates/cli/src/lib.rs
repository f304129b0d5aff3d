//! Batch driver for growthlab: example generators, JSON scenarios,
//! verification suites and report emission.

pub mod recipe;
pub mod report;
pub mod scenario;
pub mod suites;

use growthlab_core::Budget;
use thiserror::Error;

/// Environment variable overriding the default element budget.
pub const BUDGET_ENV: &str = "GROWTHLAB_BUDGET";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid recipe: {0}")]
    Recipe(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Core(#[from] growthlab_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unsupported report schema {0}")]
    Schema(u32),
}

/// Budget from the flag, else `GROWTHLAB_BUDGET`, else the default.
pub fn resolve_budget(flag: Option<usize>) -> Result<Budget, CliError> {
    if let Some(n) = flag {
        return Ok(Budget::new(n));
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Budget::new)
            .map_err(|_| CliError::Scenario(format!("{BUDGET_ENV}={v} is not a number"))),
        Err(_) => Ok(Budget::default()),
    }
}
