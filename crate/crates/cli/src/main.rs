//! `ctqw`: command-line experiments for classical and quantum walks.

mod commands;
mod config;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunArgs;
use crate::reproduce::Figure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    ChecksFailed(usize),
}

#[derive(Parser, Debug)]
#[command(name = "ctqw", version, about = "Continuous-time classical and quantum walks on restricted geometries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a graph and write it as JSON and as an edge list.
    Generate(RunArgs),
    /// Laplacian eigenvalues, optionally checked against the exact DSG spectrum.
    Spectrum(RunArgs),
    /// Transition probabilities on a time grid plus snapshots.
    Dynamics(RunArgs),
    /// Displacements, return probabilities and long-time averages.
    Observables(RunArgs),
    /// Regenerate the data behind one figure.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        /// Root directory for the bundle.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Command::Generate(args) => commands::generate(&args.resolve()?),
        Command::Spectrum(args) => commands::spectrum(&args.resolve()?),
        Command::Dynamics(args) => commands::dynamics(&args.resolve()?),
        Command::Observables(args) => commands::observables(&args.resolve()?),
        Command::Reproduce { figure, out } => reproduce::reproduce(figure, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ChecksFailed(n)) => {
            eprintln!("error: {n} check(s) failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
