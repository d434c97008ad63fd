//! `qse` — experiment runner for the hybrid split-inference engine and the
//! continuum simulator.
//!
//! Subcommands: `gen-data`, `train`, `gradcheck`, `cut-verify`, `simulate`.
//! Every command reads one TOML config, honors `--seed` overrides, writes its
//! outputs under `--out`, and exits nonzero exactly when an error or a
//! verification failure occurred. `QSE_LOG_LEVEL` (error|warn|info|debug)
//! controls logging.

mod commands;
mod config;
mod datagen;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use qse_core::ExecPolicy;

#[derive(Parser)]
#[command(name = "qse", version, about = "Hybrid split-inference engine and continuum simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "qse-out")]
    out: PathBuf,
    /// Worker thread count for data-parallel loops (1 = sequential).
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic Gaussian-cluster dataset.
    GenData(CommonArgs),
    /// Train one classifier family and record per-epoch metrics.
    Train(CommonArgs),
    /// Check analytic gradients against finite differences.
    Gradcheck(CommonArgs),
    /// Check cut-circuit reconstructions against uncut expectations.
    CutVerify(CommonArgs),
    /// Run a continuum simulation scenario.
    Simulate(CommonArgs),
}

fn exec_policy(args: &CommonArgs) -> ExecPolicy {
    match args.parallelism {
        Some(0) | None => ExecPolicy::default(),
        Some(1) => ExecPolicy::serial(),
        Some(n) => {
            // Ignore failure: the global pool can only be installed once.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            ExecPolicy::default()
        }
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("QSE_LOG_LEVEL", "warn"),
    )
    .format_timestamp(None)
    .init();

    let cli = Cli::parse();
    match &cli.command {
        Command::GenData(args) => commands::gen_data::run(&args.config, args.seed, &args.out),
        Command::Train(args) => {
            let policy = exec_policy(args);
            commands::train::run(&args.config, args.seed, &args.out, policy)
        }
        Command::Gradcheck(args) => {
            let policy = exec_policy(args);
            commands::gradcheck::run(&args.config, args.seed, &args.out, policy)
        }
        Command::CutVerify(args) => {
            let policy = exec_policy(args);
            commands::cut_verify::run(&args.config, args.seed, &args.out, policy)
        }
        Command::Simulate(args) => commands::simulate::run(&args.config, args.seed, &args.out),
    }
}
