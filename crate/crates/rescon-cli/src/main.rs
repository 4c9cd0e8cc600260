mod config;
mod error;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "rescon",
    about = "Coherent-control scenarios on overlapping-resonance systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, clap::Args)]
struct CommonArgs {
    /// Scenario configuration document (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Overrides the generator seed in the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic system and archive it.
    Generate(CommonArgs),
    /// Propagate a single uncontrolled Gaussian pulse.
    Propagate(CommonArgs),
    /// Solve the relative-control problem and verify the realized fields.
    Optimize(CommonArgs),
    /// Compute overlap/kernel measures and control extents per window.
    Diagnose(CommonArgs),
    /// Optimize, then simplify the fields and sweep amplitude retention.
    Simplify(CommonArgs),
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Generate(a) => ("generate", a),
        Command::Propagate(a) => ("propagate", a),
        Command::Optimize(a) => ("optimize", a),
        Command::Diagnose(a) => ("diagnose", a),
        Command::Simplify(a) => ("simplify", a),
    };
    match runner::run_subcommand(name, &args.config, args.out.clone(), args.seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
