//! Command-line front end: JSON inputs in, schema-versioned reports out.

pub mod commands;
pub mod report;
pub mod selftest;

pub use commands::{run, CliError, Command, JobSpec, Outcome};

/// Environment variable setting the worker thread count.
pub const THREADS_ENV: &str = "STRATICOH_THREADS";

/// Configures the global thread pool from [`THREADS_ENV`], once.
pub fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
