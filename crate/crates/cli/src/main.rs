//! Batch front end: `lichnerowicz <command> --config <path> [--set k=v]...
//! [--seed n]`. Exit codes: 0 success, 2 assumption failure, 3 solver
//! non-convergence, 4 configuration error.

mod commands;
mod config;
mod expr;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{exit_code_for, run, Invocation, EXIT_CONFIG};

#[derive(Parser, Debug)]
#[command(
    name = "lichnerowicz",
    about = "Constraint-equation toolkit: assumption checks, monotone solves, and nonexistence certificates on periodic grids"
)]
struct Cli {
    /// One of: check, solve, nonexist, assemble, manufacture.
    command: String,
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Dotted-path overrides applied to the configuration, e.g.
    /// --set solver.tol_outer=1e-9.
    #[arg(long = "set")]
    set: Vec<String>,
    /// Seed recorded in reports and used by randomized helpers.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let cfg = match config::load(&cli.config, &cli.set) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let inv = Invocation {
        cfg,
        seed: cli.seed,
    };
    match run(&cli.command, &inv) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
