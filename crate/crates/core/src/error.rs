use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid team-size bounds: n={n}, k_min={k_min}, k_max={k_max}")]
    InvalidBounds { n: usize, k_min: usize, k_max: usize },

    #[error("invalid utilities: {0}")]
    InvalidUtilities(String),

    #[error("invalid serial order: {0}")]
    InvalidOrder(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("degenerate preferences: agents {agents:?} have no positive utility")]
    DegeneratePreferences { agents: Vec<usize> },

    #[error("capacity exceeded: {what} ({count} > {limit})")]
    CapacityExceeded {
        what: &'static str,
        count: u128,
        limit: u128,
    },

    #[error("cannot deviate: {0}")]
    CannotDeviate(String),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
