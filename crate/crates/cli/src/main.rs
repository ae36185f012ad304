//! Batch driver: each subcommand reads a versioned JSON config, runs one
//! module and writes JSON/CSV reports atomically into the output directory.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "subelliptic", version, about = "Sub-Riemannian SU(n) toolkit")]
pub struct Cli {
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed; overrides every seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SUBELLIPTIC_THREADS")]
    pub threads: Option<usize>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Basis matrices and structure constants of su(n).
    Algebra {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Root-space decomposition of su(n).
    Roots {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
    /// Minimize one p-energy.
    Solve,
    /// Solve along a descending list of ε.
    Sweep,
    /// Solve, then run the inequality battery on the solution.
    Verify,
    /// Distance upper bounds for a list of point pairs.
    Ccdist,
    /// Ball volumes and their log-log slope.
    Ballvol,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
