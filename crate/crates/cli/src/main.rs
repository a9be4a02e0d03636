//! `coherent-graphs` command-line interface.
//!
//! Exit codes: 0 on success, 1 for usage errors and violated preconditions,
//! 2 for I/O failures.

// Negated comparisons such as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BenchmarkArgs, ClusterArgs, ConvergenceArgs, LeakageArgs};

#[derive(Debug, Parser)]
#[command(name = "coherent-graphs", version, about = "Spectral clustering of directed and time-evolving graphs")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "COHERENT_GRAPHS_THREADS")]
    threads: Option<usize>,

    /// Log verbosity: -v for info, -vv for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a graph or temporal graph.
    Cluster(ClusterArgs),
    /// Generate a benchmark graph.
    Benchmark(BenchmarkArgs),
    /// Leakage and forward mass of a clustering of a temporal graph.
    Leakage(LeakageArgs),
    /// Convergence of the data-driven estimate on the rotating double well.
    Convergence(ConvergenceArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Library(coherent_graphs::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Library(e) if e.is_io() => 2,
            CliError::Library(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl From<coherent_graphs::Error> for CliError {
    fn from(e: coherent_graphs::Error) -> Self {
        CliError::Library(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }

    let result = match &cli.command {
        Command::Cluster(args) => commands::cluster(args),
        Command::Benchmark(args) => commands::benchmark(args),
        Command::Leakage(args) => commands::leakage(args),
        Command::Convergence(args) => commands::convergence(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
