mod commands;
mod input;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sppfix_core::{Method, ScalarKind};

/// Least fixed points of systems of positive polynomials.
///
/// Input files ending in `.json` are read as an SPP system, a back-button
/// model or a pPDA (tried in that order); anything else is DSL text, with `-`
/// reading DSL from stdin.
#[derive(Debug, Parser)]
#[command(name = "sppfix", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Numeric {
    /// `rational` for exact arithmetic or `float:<bits>` with bits >= 64.
    #[arg(long, default_value = "float:256")]
    pub scalar: ScalarKind,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Approximate the least fixed point.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "newton")]
        method: Method,
        #[command(flatten)]
        numeric: Numeric,
        /// Newton only: stop once a proximity certificate has this many bits.
        #[arg(long)]
        target_bits: Option<u32>,
        /// Precision parameter `i` of the decomposed method.
        #[arg(long, default_value_t = 1)]
        dnm_i: u64,
        /// Include every iterate in the output.
        #[arg(long)]
        trace: bool,
    },
    /// Newton with per-SCC proximity certificates until `--target-bits`.
    Certify {
        file: PathBuf,
        #[command(flatten)]
        numeric: Numeric,
        #[arg(long, default_value_t = 32)]
        target_bits: u32,
    },
    /// Print the SCC condensation with depths.
    Decompose {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Translate the input to DSL text (or the JSON system format).
    Convert {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Iterations per bit on the chain family `f^(n)`.
    Bench {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "float:256")]
        scalar: ScalarKind,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: String) -> Self {
        CliError { code: 1, message }
    }

    pub fn budget(message: String) -> Self {
        CliError { code: 2, message }
    }
}

impl From<sppfix_core::Error> for CliError {
    fn from(e: sppfix_core::Error) -> Self {
        CliError::input(e.to_string())
    }
}

/// What a command produced: text for stdout plus an optional failure that
/// still lets the report be printed (certification budget).
pub struct Report {
    pub stdout: String,
    pub failure: Option<CliError>,
}

impl Report {
    pub fn ok(stdout: String) -> Self {
        Report { stdout, failure: None }
    }
}

fn run(cli: Cli) -> Result<Report, CliError> {
    match cli.command {
        Command::Solve {
            file,
            method,
            numeric,
            target_bits,
            dnm_i,
            trace,
        } => commands::solve(&file, method, &numeric, target_bits, dnm_i, trace),
        Command::Certify {
            file,
            numeric,
            target_bits,
        } => commands::certify(&file, &numeric, target_bits),
        Command::Decompose { file, json } => commands::decompose(&file, json),
        Command::Convert { file, json } => commands::convert(&file, json),
        Command::Bench { n, k, scalar, json } => commands::bench(n, k, scalar, json),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for an exhausted
    // certification budget here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(report) => {
            print!("{}", report.stdout);
            match report.failure {
                None => ExitCode::SUCCESS,
                Some(e) => {
                    eprintln!("error: {}", e.message);
                    ExitCode::from(e.code)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
