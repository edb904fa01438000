//! Error types shared across the crate.

use thiserror::Error;

/// Structural errors raised while assembling a [`Scenario`](crate::Scenario).
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("type table has no decommissioned (off) type")]
    MissingOffType,
    #[error("horizon must be at least 1, got {0}")]
    BadHorizon(u32),
    #[error("demand table has {got} entries, expected {expected}")]
    DemandSize { expected: usize, got: usize },
    #[error("station {0} references an unknown type")]
    BadTypeIndex(String),
    #[error("station {0} references an unknown operator")]
    BadOperator(String),
}

/// Errors raised by the scenario generator.
#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("counts must be positive (stations, clusters, operators)")]
    NonPositiveCounts,
    #[error("growth factor must be >= 1, got {0}")]
    BadGrowth(f64),
    #[error("horizon must be >= 2, got {0}")]
    BadHorizon(u32),
}

/// Errors raised while loading or saving scenario files.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },
    #[error("demand table missing entry for cluster {cluster}, period {period}, operator {operator}")]
    MissingDemand {
        cluster: String,
        period: u32,
        operator: String,
    },
    #[error("scenario violates invariants: {0}")]
    Invalid(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// Errors raised by the brute-force oracles.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance exceeds oracle budget: {0}")]
    BudgetExceeded(String),
}
