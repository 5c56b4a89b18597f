//! `sepmaj`: command-line front end.
//!
//! Exit codes: 0 success or feasible, 1 infeasible or violations found,
//! 2 usage or data error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sepmaj", version, about = "Separable operations on bipartite pure states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print ascending Schmidt weights and the E_n vector of a state.
    Schmidt {
        state: PathBuf,
    },
    /// Apply a closed product Kraus set to a state and print the ensemble.
    Apply {
        operation: PathBuf,
        state: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        prune_tol: f64,
    },
    /// Decide whether a target state or ensemble is reachable from a state.
    Feasible {
        state: PathBuf,
        /// Target state file or ensemble file.
        target: PathBuf,
        /// Also report the optimal conversion probability (state targets only).
        #[arg(long)]
        pmax: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run a randomized verification campaign.
    Verify(VerifyArgs),
    /// Regenerate and evaluate one campaign instance from its seed.
    Replay {
        target: String,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        ranges: RangeArgs,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Generate a state or operation file.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
}

#[derive(Debug, Args)]
struct RangeArgs {
    /// Local dimension range, e.g. `2..4`; sets both sides unless --dims-b is given.
    #[arg(long, default_value = "2..4")]
    dims: String,
    /// Range for D_B.
    #[arg(long)]
    dims_b: Option<String>,
    /// Range for the number of Kraus pairs.
    #[arg(long, default_value = "1..16")]
    kraus: String,
    /// Range for LOCC rounds.
    #[arg(long, default_value = "1..3")]
    rounds: String,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// thm1, thm2, lemma1, pmax-consistency or monotone.
    target: String,
    #[arg(long, default_value_t = 1000)]
    instances: u64,
    /// Master seed; required with --json-out.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    ranges: RangeArgs,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Random state, or a state with prescribed Schmidt weights.
    State {
        #[arg(long, num_args = 2, value_names = ["D_A", "D_B"])]
        dims: Option<Vec<usize>>,
        /// Comma-separated Schmidt weights; normalized if they do not sum to 1.
        #[arg(long, value_delimiter = ',')]
        schmidt: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random LOCC protocol as a product Kraus set.
    Sepop {
        #[arg(long, num_args = 2, value_names = ["D_A", "D_B"], default_values_t = [2, 2])]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        rounds: usize,
        #[arg(long, default_value_t = 2)]
        outcomes: usize,
        /// Reuse one instrument per round instead of one per prior outcome.
        #[arg(long)]
        branch_independent: bool,
        /// Let Bob act in the first round.
        #[arg(long)]
        bob_first: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
