//! Experiment runner for quench dynamics: configuration, run directories,
//! checkpoints, CSV tables and replicate statistics.

pub mod config;
pub mod error;
pub mod io;
pub mod run;
pub mod stats;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "QUENCH_THREADS";

/// Sizes the rayon pool and faer's parallelism from [`THREADS_ENV`].
/// Unset or empty leaves the library defaults.
pub fn configure_threads() -> CliResult<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    if raw.trim().is_empty() {
        return Ok(None);
    }
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))?;
    faer::set_global_parallelism(if n == 1 { faer::Par::Seq } else { faer::Par::rayon(n) });
    Ok(Some(n))
}
