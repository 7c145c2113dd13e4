//! `tensor-chain`: derivatives of `f(g(x))` from problem files.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on bad input.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tensor_chain::FdConfig;

#[derive(Parser)]
#[command(
    name = "tensor-chain",
    version,
    about = "Chain-rule derivative tensors of f(g(x))"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the gradient (order 1) or Hessian (order 2) of f(g(x)).
    Derive {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        /// Comma- or space-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Compare the chain rule, its matrix form, direct substitution and
    /// finite differences at a point.
    Verify {
        #[arg(long)]
        file: PathBuf,
        /// Defaults to the `point:` lines of the file.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Finite-difference step.
        #[arg(long, default_value_t = FdConfig::DEFAULT_STEP)]
        h: f64,
        /// Relative tolerance for every pairwise comparison.
        #[arg(long, default_value_t = FdConfig::GENERAL_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Walk through Rosenbrock's function under y = (x1, x1^2 - x2).
    Demo {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Derive {
            file,
            order,
            point,
            json,
        } => commands::derive(file, *order as usize, point.as_deref(), *json),
        Command::Verify {
            file,
            point,
            h,
            tol,
            json,
        } => commands::verify(file, point.as_deref(), *h, *tol, *json),
        Command::Demo { json } => commands::demo(*json),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
