use std::path::PathBuf;
use std::process::ExitCode;

use aw_core::benchmarks::BenchmarkName;
use aw_core::driver::{self, Mode, RunConfig};
use clap::{Parser, Subcommand};

/// Adaptive Arnold-Winther mixed FEM for planar elasticity.
#[derive(Parser)]
#[command(name = "aw-adapt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark and write its convergence history.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// academic | inclusion | lshape | cook
    #[arg(long)]
    benchmark: BenchmarkName,
    #[arg(long, default_value_t = 0.3)]
    nu: f64,
    #[arg(long = "E", default_value_t = aw_core::benchmarks::YOUNG)]
    young: f64,
    /// uniform | adaptive
    #[arg(long, default_value = "adaptive")]
    mode: Mode,
    #[arg(long, default_value_t = driver::DEFAULT_THETA)]
    theta: f64,
    #[arg(long, default_value_t = 6)]
    levels: usize,
    #[arg(long)]
    max_dofs: Option<usize>,
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Directory receiving one mesh file per level.
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    /// Compare against a reference solution when no exact one exists.
    #[arg(long)]
    reference: bool,
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    let config = RunConfig {
        nu: args.nu,
        young: args.young,
        theta: args.theta,
        max_dofs: args.max_dofs,
        csv: Some(args.csv),
        svg: args.svg,
        mesh_out: args.mesh_out,
        reference: args.reference,
        ..RunConfig::new(args.benchmark, args.mode, args.levels)
    };
    match driver::run(&config) {
        Ok(history) => {
            for r in &history.records {
                let err = r.error.map(|e| format!("{e:.4e}")).unwrap_or_else(|| "-".into());
                println!("level {:2}  ndof {:8}  err {err:>11}  eta {:.4e}", r.level, r.ndof, r.eta);
            }
            if let Some(rate) = history.error_rate() {
                println!("error rate {rate:.3}");
            }
            if let Some(rate) = history.eta_rate() {
                println!("eta rate {rate:.3}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
