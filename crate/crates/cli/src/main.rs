//! `hamsim`: experiments on product-formula simulation of sparse Hamiltonians.
//!
//! Exit status is 0 on success, 1 when a verification or accuracy check
//! fails, and 2 for malformed arguments or inputs.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Format;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        CliError::Usage(msg.to_string())
    }

    pub fn failure(msg: impl fmt::Display) -> Self {
        CliError::Failure(msg.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Failure(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Failure(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "hamsim",
    version,
    about = "Sparse Hamiltonian simulation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// Hamiltonian in entry-list format.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generator: `random:n=<>,d=<>,seed=<>,norm=<>` or `parity:bits=<01..>`.
    #[arg(long = "gen")]
    generator: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parameter choice and exponential-count bounds.
    Bound {
        #[arg(long, default_value_t = 2)]
        terms: usize,
        /// Scaled time ‖H‖ t.
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Error against r for several orders.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        /// Number of random terms for `--gen random`.
        #[arg(long, default_value_t = 2)]
        terms: usize,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        /// Orders, comma separated.
        #[arg(long, default_value = "1,2")]
        k: String,
        /// Slice counts, comma separated.
        #[arg(long, default_value = "4,8,16,32,64,128,256")]
        r: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Colored decomposition, product formula and exact comparison.
    Simulate {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        r: Option<u64>,
        /// Seed for a random initial state; basis state 0 otherwise.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Verify the edge-coloring decomposition.
    Decompose {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Parity computed by Hamiltonian evolution.
    Parity {
        #[arg(long)]
        bits: String,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, value_enum, default_value_t = commands::DecompArg::Split)]
        decomp: commands::DecompArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recompute the two coin-tossing tables.
    Tables {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = hamsim_core::NumericsConfig::from_env().map_err(CliError::usage)?;
    match cli.command {
        Command::Bound {
            terms,
            tau,
            eps,
            k,
            format,
            output,
        } => commands::bound(terms, tau, eps, k, format, output.out),
        Command::Sweep {
            source,
            terms,
            time,
            k,
            r,
            format,
            output,
        } => {
            let source = config::Source::from_args(source.input, source.generator)?;
            let ks = config::parse_list::<u32>(&k, "--k")?;
            let rs = config::parse_list::<u64>(&r, "--r")?;
            commands::sweep(&source, terms, time, &ks, &rs, format, output.out, &cfg)
        }
        Command::Simulate {
            source,
            time,
            eps,
            k,
            r,
            seed,
            format,
            output,
        } => {
            let config = config::ExperimentConfig {
                command: "simulate",
                source: Some(config::Source::from_args(source.input, source.generator)?),
                t: time,
                eps,
                k,
                r,
                out: output.out,
                format,
            };
            commands::simulate(&config, seed, &cfg)
        }
        Command::Decompose {
            source,
            format,
            output,
        } => {
            let source = config::Source::from_args(source.input, source.generator)?;
            commands::decompose(&source, format, output.out, &cfg)
        }
        Command::Parity {
            bits,
            eps,
            k,
            decomp,
            format,
            output,
        } => commands::parity(&bits, eps, k, decomp, format, output.out, &cfg),
        Command::Tables { format, output } => commands::tables(format, output.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hamsim: {e}");
            ExitCode::from(e.code())
        }
    }
}
