//! Experiment harness for the GPSM security-capacity simulator: JSON
//! configuration, parallel sweep drivers, scatter sampling, self-checking
//! oracles, and CSV/JSON persistence.

pub mod config;
pub mod oracle;
pub mod output;
pub mod scatter;
pub mod sweep;

/// Harness-level errors, split by how the process should exit: configuration
/// problems exit with 2, property-check failures with 3.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("property check failed: {0}")]
    CheckFailure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<gpsm_core::Error> for HarnessError {
    fn from(e: gpsm_core::Error) -> Self {
        HarnessError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Build the worker pool; `workers = 0` uses the default thread count.
pub fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot build worker pool: {e}")))
}
