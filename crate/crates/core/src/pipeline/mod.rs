//! Command implementations behind the `blockforge` binary: configuration,
//! batch runs with manifests, and the hard-instance loop.

mod commands;
mod config;
mod harden;
mod io;

pub use commands::{
    cmd_buildlib, cmd_decompose, cmd_feascheck, cmd_generate, cmd_genbench, cmd_harden, cmd_stats, cmd_visualize,
};
pub use config::{BenchConfig, HardenConfig, Hardness, MetricsConfig, Overrides, PipelineConfig, ENV_PREFIX};
pub use harden::{harden, Evaluator, HardPool, HardenLog, OracleNodes, PoolSlot, SolverTime};
pub use io::{collect_inputs, read_instance, Failure, InputEntry, Manifest};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::benchgen::BenchError;
use crate::detect::DetectError;
use crate::library::LibraryError;
use crate::milp::MpsError;
use crate::ops::OpError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("no input instances found")]
    NoInputs,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Mps { path: PathBuf, source: MpsError },
    #[error("{0}")]
    Nothing(String),
    #[error("metrics: {0}")]
    Metrics(String),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Bench(#[from] BenchError),
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}

/// Runs `f` on a thread pool with `jobs` workers (all cores when `None`).
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, PipelineError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    let pool = b.build().map_err(|e| PipelineError::Config(e.to_string()))?;
    Ok(pool.install(f))
}
