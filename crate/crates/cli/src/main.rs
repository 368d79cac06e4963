//! `poclab`: sample random hypergraphs, compute k-cores two ways, evaluate
//! threshold predictions, and run seeded Monte Carlo sweeps.
//!
//! Exit codes: 0 on success, 1 on validation errors (bad flags, bad
//! parameters, no crossing), 2 on I/O errors.

mod commands;
mod config;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use poclab_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "poclab",
    version,
    about = "Random hypergraph phase-transition laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: commands::Command,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match cli.command.run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
