use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use eqlab_cli::{load_params, run_experiment, write_report, ExperimentConfig, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "eqlab", version, about = "Equidistribution experiments on projective spaces")]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// Strict JSON parameter file.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    no_plots: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let params = load_params(cli.subcommand, &cli.config)?;
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let cfg = ExperimentConfig {
        subcommand: cli.subcommand,
        params,
        seed: cli.seed,
        workers,
        out_dir: cli.out,
        plots: !cli.no_plots,
    };
    let (outcome, wall) = run_experiment(&cfg)?;
    write_report(&cfg, &outcome, wall, &cfg.out_dir)?;
    for c in &outcome.report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {} ({:.1} s)", cfg.out_dir.display(), wall);
    Ok(outcome.report.all_passed())
}
