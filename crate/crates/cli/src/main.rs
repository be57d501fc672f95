//! `cut-hho`: command-line driver of the unfitted HHO interface solver.
//!
//! Exit codes: 0 on success, 1 when a check, the solve or the EOC
//! threshold fails, 2 on usage and configuration errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

/// Seed of the mesh perturbation.
const SEED_VAR: &str = "CUT_HHO_SEED";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl From<cut_hho::Error> for CliError {
    fn from(e: cut_hho::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "cut-hho", version, about = "Unfitted HHO solver for 2D elliptic interface problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, value_name = "N", default_value_t = 0)]
    threads: usize,
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Face degree; overrides `discretization.k`.
    #[arg(long, value_name = "N")]
    k: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Resolution, cut census and agglomeration diagnostics.
    CheckMesh(Common),
    /// Solve one manufactured problem and write field and error output.
    Solve(Common),
    /// Error and EOC table over a mesh sequence.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Cells per direction, e.g. `8,16,32`; overrides `convergence.meshes`.
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        meshes: Option<Vec<usize>>,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (common, meshes) = match &cli.command {
        Command::CheckMesh(c) | Command::Solve(c) => (c, None),
        Command::Convergence { common, meshes } => (common, meshes.clone()),
    };
    let overrides = Overrides { k: common.k, out: common.out.clone(), meshes, seed: std::env::var(SEED_VAR).ok() };
    let cfg = RunConfig::load(&common.config, &overrides)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads)
        .build_global()
        .map_err(|e| CliError::Failure(format!("cannot start worker threads: {e}")))?;
    match cli.command {
        Command::CheckMesh(_) => commands::check_mesh(&cfg),
        Command::Solve(_) => commands::solve(&cfg).map(|_| true),
        Command::Convergence { .. } => commands::convergence(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
