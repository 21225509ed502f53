//! Batch front end for loop-architecture boson sampling.
//!
//! Exit codes: 0 on success, 1 for invalid input (bad flags, malformed
//! files, failed validation), 2 for numerical or resource failures.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "loopsampler",
    version,
    about = "Time-bin loop boson-sampling simulator and schedule compiler"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UnitaryKind {
    Dft,
    Hadamard,
    Haar,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    PerRotation,
    Packed,
}

#[derive(Args, Debug)]
struct Output {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a target unitary as JSON.
    GenUnitary {
        kind: UnitaryKind,
        #[arg(long)]
        n: usize,
        /// Required for haar.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Compile a unitary into a loop program.
    Compile {
        #[arg(long)]
        unitary: PathBuf,
        #[arg(long, value_enum, default_value = "per-rotation")]
        strategy: StrategyArg,
        /// Pulse separation recorded in the program, in seconds.
        #[arg(long)]
        tau: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate the unitary a loop program implements.
    Evaluate {
        #[arg(long)]
        program: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Exact output distribution as CSV.
    Dist {
        #[arg(long)]
        unitary: PathBuf,
        /// Input occupation, e.g. "1 1 0 0".
        #[arg(long)]
        input: String,
        #[command(flatten)]
        output: Output,
    },
    /// Draw samples from the exact output distribution.
    Sample {
        #[arg(long)]
        unitary: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long)]
        shots: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Uniformity score of a unitary.
    Similarity {
        #[arg(long)]
        unitary: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Random search for the most uniform fixed-ratio loop sequence.
    McSimilarity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Worst-case net efficiency, optionally with a program's lossy transfer matrix.
    Loss {
        #[arg(long)]
        eta_inner: f64,
        #[arg(long)]
        eta_outer: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        roundtrips: usize,
        #[arg(long)]
        program: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Timing-mismatch feasibility checks.
    Feasibility {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        sigma: f64,
        #[command(flatten)]
        output: Output,
    },
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
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
