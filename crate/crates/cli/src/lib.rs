//! Command-line driver: configuration, checkpoints, series output and the
//! `spin7` subcommands.

pub mod checkpoint;
pub mod commands;
pub mod error;
pub mod io;

pub use commands::{execute, load_config, Cli, Command};
pub use error::{CliError, CliResult};

/// Cap the global thread pool from `SPIN7_THREADS`, if set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("SPIN7_THREADS") else {
        return Ok(());
    };
    let n: usize =
        v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Config(format!("SPIN7_THREADS must be a positive integer, got '{v}'"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}
