//! `percq` — reproducible entanglement-percolation runs from the shell.
//!
//! Every command validates its domain before computing, computes fully in
//! memory, then writes: a deterministic data file (CSV or JSON) plus a
//! sidecar `<name>.manifest.json` carrying the flags, seed, tool version and
//! start time. Exit codes: 0 success, 1 I/O failure, 2 usage or domain
//! error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use percq_core::ProtocolMode;
use thiserror::Error;

#[derive(Parser)]
#[command(
    name = "percq",
    version,
    about = "Entanglement percolation on hierarchical 1D chain networks"
)]
struct Cli {
    /// Cap worker threads for parallel trials; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the border-connectivity recursion, emitting one k,P_k row per level.
    Recursion {
        /// Link conversion probability in [0, 1].
        #[arg(long)]
        p: f64,
        /// Highest recursion depth k to emit.
        #[arg(long, default_value_t = 16)]
        k_max: usize,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep p: recursion prediction, fixed point, Monte Carlo estimate, classical baseline.
    Sweep {
        #[arg(long)]
        p_min: f64,
        #[arg(long)]
        p_max: f64,
        /// Number of evenly spaced p values (1 emits p_min alone).
        #[arg(long, default_value_t = 9)]
        steps: usize,
        #[arg(long, default_value_t = 257)]
        n_nodes: usize,
        /// Pairs per edge; defaults to the full-hierarchy count for N = 2^m + 1.
        #[arg(long)]
        k_pairs: Option<u32>,
        /// Read the network from a `hiernet` text file instead of N/K flags.
        #[arg(long)]
        net_file: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, env = "PERCQ_SEED", default_value_t = 0)]
        seed: u64,
        /// Output CSV path; a JSON mirror and manifest are written alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the chain protocol with ideal or state-tracked link openings.
    Protocol {
        #[arg(long, default_value_t = 9)]
        n_nodes: usize,
        #[arg(long)]
        k_pairs: Option<u32>,
        #[arg(long)]
        net_file: Option<PathBuf>,
        /// Smaller Schmidt coefficient of the base pair, in [0, 1/2].
        #[arg(long)]
        lambda2: f64,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, env = "PERCQ_SEED", default_value_t = 0)]
        seed: u64,
        /// Output JSON path; per-level CSV and manifest are written alongside.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Price post-swap distillation, including the fidelity iteration trace.
    Distill {
        /// Smaller Schmidt coefficient of the base pair, in [0, 1/2].
        #[arg(long)]
        lambda2: f64,
        #[arg(long, default_value_t = 9)]
        n_nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entangled-pair accounting: exact count, scaling estimate, N² comparator.
    Resources {
        #[arg(long)]
        n_nodes: usize,
        /// Pairs per edge; defaults to the full-hierarchy count for N = 2^m + 1.
        #[arg(long)]
        k_pairs: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Every link opens with the base pair's singlet conversion probability.
    IdealScp,
    /// Sample each link's state through its swap tree, then convert.
    StateTracked,
}

impl From<ModeArg> for ProtocolMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::IdealScp => ProtocolMode::IdealScp,
            ModeArg::StateTracked => ProtocolMode::StateTracked,
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("{message}: {source}")]
    Io {
        message: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("percq: --threads must be at least 1");
            return ExitCode::from(2);
        }
        // Results are thread-count independent by the per-trial seed
        // contract; this only caps parallelism.
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("percq: failed to configure {threads} worker threads: {err}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("percq: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
