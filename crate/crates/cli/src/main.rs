//! Command-line front end: every subcommand writes one table as CSV or
//! JSON, and `run` executes a whole scenario file.

mod commands;
mod config;
mod fail;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::Command;
use fail::{exit_code, invalid};

#[derive(Parser)]
#[command(name = "neurodyn", version, about = "Learning dynamics of small ReLU classifiers")]
struct Cli {
    #[command(subcommand)]
    command: TopLevel,
}

#[derive(Subcommand)]
enum TopLevel {
    #[command(flatten)]
    Op(Command),
    /// Run every scenario of a JSON config file.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Resolve relative output paths here instead of next to the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Load and validate only.
    #[arg(long)]
    check: bool,
}

/// Caps the rayon pool at `NEURODYN_THREADS` when set.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("NEURODYN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| invalid(format!("NEURODYN_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        TopLevel::Op(command) => {
            let line = config::execute(&command)?;
            eprintln!("{line}");
        }
        TopLevel::Run(args) => {
            let scenarios = config::load_config(&args.config, args.out_dir.as_deref())?;
            if args.check {
                eprintln!("{}: {} scenarios valid", args.config.display(), scenarios.len());
            } else {
                config::run_scenarios(&scenarios)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
