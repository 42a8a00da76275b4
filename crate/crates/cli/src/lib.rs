//! Experiment orchestration for the eqlab laboratory: strict configs, seeded
//! parallel runs and report files.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};

pub use config::{parse_params, ConfigError, ExperimentConfig, Params, Subcommand};
pub use experiments::{Outcome, PlotSpec};
pub use output::write_report;

/// Read and validate the parameter file of a subcommand.
pub fn load_params(sub: Subcommand, path: &Path) -> Result<Params> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_params(sub, &text)?)
}

/// Run the experiment on a pool of `cfg.workers` threads. Results do not
/// depend on the worker count. Returns the outcome and the wall time.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Outcome, f64)> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.max(1)).build()?;
    let start = Instant::now();
    let outcome = pool.install(|| experiments::run(&cfg.params, cfg.seed))?;
    Ok((outcome, start.elapsed().as_secs_f64()))
}
