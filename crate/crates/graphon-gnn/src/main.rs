//! Thin CLI over [`graphon_gnn::run`]: parse arguments, dispatch, map
//! errors to exit codes (1 for runtime failures, 2 for config problems).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphon_gnn::run::{self, CommandKind, RunOptions};

#[derive(Parser)]
#[command(
    name = "graphon-gnn",
    version,
    about = "Experiment runner for GNN training on growing graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; unknown keys are rejected.
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config's `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory run outputs are created under.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Worker threads. Affects speed only; outputs never depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the step-object approximation bounds across graph sizes.
    GraphonCheck(Common),
    /// Dump eigenvalues and band summaries of sampled shift operators.
    Spectra(Common),
    /// Teacher-student training on a growing graph sequence.
    TrainTs(Common),
    /// Gradient-distance sweep against a large reference graph.
    GradDist(Common),
    /// Generate an expert imitation dataset for the flocking task.
    FlockGen(Common),
    /// Train a flocking policy by imitation while the swarm grows.
    FlockTrain(Common),
    /// Evaluate a trained policy against the expert on shared episodes.
    FlockEval(Common),
    /// Merge CSVs from earlier runs into one tidy long-format table.
    Report(Common),
}

impl Command {
    fn split(self) -> (CommandKind, Common) {
        match self {
            Command::GraphonCheck(c) => (CommandKind::GraphonCheck, c),
            Command::Spectra(c) => (CommandKind::Spectra, c),
            Command::TrainTs(c) => (CommandKind::TrainTs, c),
            Command::GradDist(c) => (CommandKind::GradDist, c),
            Command::FlockGen(c) => (CommandKind::FlockGen, c),
            Command::FlockTrain(c) => (CommandKind::FlockTrain, c),
            Command::FlockEval(c) => (CommandKind::FlockEval, c),
            Command::Report(c) => (CommandKind::Report, c),
        }
    }
}

fn main() -> ExitCode {
    let (kind, common) = Cli::parse().command.split();
    let options = RunOptions {
        config_path: common.config,
        seed: common.seed,
        out_dir: common.out,
        threads: common.threads,
    };
    match run::execute(kind, &options) {
        Ok(summary) => {
            println!("{}", summary.run_dir.display());
            for name in &summary.outputs {
                println!("  {name}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(run::exit_code(&err) as u8)
        }
    }
}
