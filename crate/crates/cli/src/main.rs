//! `hierflow` — build entropy-minimal hierarchies over road-network graphs,
//! derive attention masks and correlation scores from them, and run the
//! forward model on series windows.
//!
//! Exit codes: 0 on success, 2 on input or validation failure, 3 when a
//! structural constraint cannot be met (e.g. too few attention heads for
//! the hierarchy's mask count).

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::FileConfig;

#[derive(Debug, Parser)]
#[command(
    name = "hierflow",
    version,
    about = "Hierarchy-aware graph abstractions and a forward-only spatiotemporal transformer"
)]
struct Cli {
    /// Flat `key = value` run configuration; command-line flags override
    /// file values, unknown keys are errors.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a graph's structural entropy under a tree (flat by default).
    Se(commands::SeArgs),
    /// Greedily minimize structural entropy; write the tree and a trace.
    Optimize(commands::OptimizeArgs),
    /// Emit attention masks, correlation scores, and the head manifest.
    Artifacts(commands::ArtifactsArgs),
    /// Run the forward model and write the prediction container.
    Forward(commands::ForwardArgs),
    /// Generate a deterministic community graph and series fixture.
    Synth(commands::SynthArgs),
    /// Compare greedy minimization against the exhaustive two-level oracle.
    Oracle(commands::OracleArgs),
}

fn run() -> hierflow::Result<()> {
    let cli = Cli::parse();
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Se(args) => commands::cmd_se(args, &cfg),
        Command::Optimize(args) => commands::cmd_optimize(args, &cfg),
        Command::Artifacts(args) => commands::cmd_artifacts(args, &cfg),
        Command::Forward(args) => commands::cmd_forward(args, &cfg),
        Command::Synth(args) => commands::cmd_synth(args, &cfg),
        Command::Oracle(args) => commands::cmd_oracle(args, &cfg),
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err}");
        std::process::exit(if err.is_constraint() { 3 } else { 2 });
    }
}
