//! `dislocq`: solve, self-check and mesh-generation front-end.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::CliError;

#[derive(Parser)]
#[command(name = "dislocq", version, about = "Equilibria of solids with uniform dislocation distributions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the outer iteration and write fields, stresses, report and summary.
    Solve { config: PathBuf },
    /// Gradient, Legendre-Hadamard, Burgers and scaling self-checks.
    Check { config: PathBuf },
    /// Generate a disk or ball mesh and save it.
    Mesh {
        shape: String,
        #[arg(allow_negative_numbers = true)]
        radius: f64,
        #[arg(allow_negative_numbers = true)]
        h: f64,
        out: PathBuf,
    },
}

/// `DISLOCQ_THREADS` caps the worker pool; unset or 0 runs single-threaded.
fn configure_threads() -> Result<(), CliError> {
    let threads = match std::env::var("DISLOCQ_THREADS") {
        Err(_) => 1,
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => 1,
            Ok(n) => n,
            Err(_) => return Err(CliError::Usage(format!("DISLOCQ_THREADS must be a non-negative integer, got `{v}`"))),
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Solve { config } => commands::solve(&config).map(|_| true),
        Command::Check { config } => commands::check(&config),
        Command::Mesh { shape, radius, h, out } => commands::mesh(&shape, radius, h, &out).map(|_| true),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
