mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use diracwalk::Error;

#[derive(Parser)]
#[command(name = "diracwalk", version, about = "Quantum-walk search and state transfer on graphene lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps and scans (DIRACWALK_WORKERS overrides).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Grid resolution: gamma points for sweeps, time samples for dynamics.
    #[arg(long, global = true)]
    grid: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build a lattice and write it as JSON.
    Lattice,
    /// Spectrum of the search Hamiltonian across a gamma grid.
    Sweep,
    /// Run a search from a start state.
    Search,
    /// Transfer between a source and a target perturbation.
    Comm,
    /// Crossing gap versus N with both scaling-law fits.
    Scaling,
    /// Reduced models and their predicted times.
    Reduced,
    /// Quantization condition, lattice sums and overlap estimates.
    Theory,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDimensions(_)
            | Error::UnknownSite(_)
            | Error::UnsupportedLattice(_)
            | Error::InvalidPerturbation(_)
            | Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. } => CliError::Config(e.to_string()),
            Error::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub struct Ctx {
    pub out: PathBuf,
    pub grid: Option<usize>,
}

fn workers(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var("DIRACWALK_WORKERS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("DIRACWALK_WORKERS must be a positive integer, got {v:?}"))),
        Err(_) => match flag {
            Some(0) => Err(CliError::Config("--workers must be positive".into())),
            f => Ok(f),
        },
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = workers(cli.workers)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
    }
    if cli.grid == Some(0) {
        return Err(CliError::Config("--grid must be positive".into()));
    }
    let path = cli.config.ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let cfg = config::ExperimentConfig::load(&path)?;
    std::fs::create_dir_all(&cli.out)?;
    let ctx = Ctx { out: cli.out, grid: cli.grid };
    match cli.command {
        Command::Lattice => commands::lattice(&cfg, &ctx),
        Command::Sweep => commands::sweep(&cfg, &ctx),
        Command::Search => commands::search(&cfg, &ctx),
        Command::Comm => commands::comm(&cfg, &ctx),
        Command::Scaling => commands::scaling(&cfg, &ctx),
        Command::Reduced => commands::reduced(&cfg, &ctx),
        Command::Theory => commands::theory(&cfg, &ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
        Err(CliError::Io(m)) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(1)
        }
    }
}
