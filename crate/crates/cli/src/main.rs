mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Converts driving scenarios into heterogeneous graph datasets.
#[derive(Debug, Parser)]
#[command(name = "trafficgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a dataset from the scenarios named in a run configuration.
    Extract {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the document.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = one per core); overrides the document.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        overwrite: bool,
        /// Print a JSON summary on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Summarize a dataset or one of its samples.
    Inspect {
        dataset: PathBuf,
        #[arg(long)]
        index: Option<usize>,
        /// Per-channel min/max/mean, ignoring NaN padding.
        #[arg(long)]
        stats: bool,
        #[arg(long)]
        json: bool,
    },
    /// Check every sample's checksum, decoding and graph invariants.
    Validate { dataset: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TRAFFICGRAPH_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract { config, out, workers, overwrite, json } => {
            commands::extract(&config, out, workers, overwrite, json)
        }
        Command::Inspect { dataset, index, stats, json } => commands::inspect(&dataset, index, stats, json),
        Command::Validate { dataset } => commands::validate(&dataset),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
