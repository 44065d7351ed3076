//! `dynsleuth`: train targets, attack them, and tabulate the results.

mod cmd;
mod run;
mod settings;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "dynsleuth", version, about = "Recover training environments from trained RL policies")]
struct Cli {
    /// Worker threads [default: logical cores]
    #[arg(long, global = true, env = "DYNSLEUTH_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate constraint-valid random floor plans
    GenMaps(cmd::maps::GenMapsArgs),
    /// Train a target policy
    Train(cmd::train::TrainArgs),
    /// Search for the floor plan a grid-world policy was trained on
    Attack(cmd::attack::AttackArgs),
    /// Candidate inference with shadow policies
    #[command(subcommand)]
    Shadow(cmd::shadow::ShadowCmd),
    /// Aggregate reports into a markdown results table
    Report(cmd::report::ReportArgs),
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.jobs {
        anyhow::ensure!(n > 0, "--jobs must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::GenMaps(a) => cmd::maps::run(a),
        Command::Train(a) => cmd::train::run(a),
        Command::Attack(a) => cmd::attack::run(a),
        Command::Shadow(c) => cmd::shadow::run(c),
        Command::Report(a) => cmd::report::run(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
