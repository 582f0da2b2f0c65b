use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod oracle;
mod svg;

/// Decentralized fictitious play experiments.
#[derive(Parser, Debug)]
#[command(name = "dfp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write its trace, summary and manifest.
    Run {
        config: PathBuf,
        /// Output directory (default: $DFP_OUT/<config name>, or ./dfp-out/<config name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fail with exit code 3 if the graph is not window-connected.
        #[arg(long)]
        strict: bool,
        /// Also write SVG charts.
        #[arg(long)]
        svg: bool,
    },
    /// Check window connectivity and the weight bound without running.
    Validate { config: PathBuf },
    /// Run every (seed, topology) pair and aggregate.
    Sweep(SweepArgs),
    /// Print reference tables for the consensus bounds.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    pub config: PathBuf,
    /// Comma-separated run seeds.
    #[arg(long)]
    pub seeds: String,
    /// Comma-separated `<kind>-<base>` names, e.g. static-ring,cycle-star.
    /// Kinds: static, cycle, random, windowed. Bases: ring, star, complete.
    #[arg(long)]
    pub topologies: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// `t,s,actual_maxdev,kappa_rho_bound` for Φ(t, s) over a seeded sequence.
    Lemma1(oracle::Lemma1Args),
    /// Tracking error of a stubborn signal moving by at most 1/t.
    Tracking(oracle::TrackingArgs),
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or invalid configuration: exit 2.
    Config(String),
    /// Window connectivity failed where it is required: exit 3.
    Connectivity(String),
    /// A contract violated while running: exit 4.
    Runtime(String),
    /// A check failed that is not about connectivity: exit 1.
    Check(String),
    /// Filesystem trouble: exit 1.
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Connectivity(_) => 3,
            CliError::Runtime(_) => 4,
            CliError::Check(_) | CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Connectivity(m)
            | CliError::Runtime(m)
            | CliError::Check(m)
            | CliError::Io(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            strict,
            svg,
        } => commands::cmd_run(&config, out, strict, svg).map(|_| ()),
        Command::Validate { config } => commands::cmd_validate(&config),
        Command::Sweep(args) => commands::cmd_sweep(&args),
        Command::Oracle(OracleCommand::Lemma1(args)) => oracle::lemma1(&args),
        Command::Oracle(OracleCommand::Tracking(args)) => oracle::tracking(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dfp: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
