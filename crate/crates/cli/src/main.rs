//! `entropic-ot`: command-line driver.
//!
//! Exit codes: 0 success, 2 usage, 3 invalid parameter, 4 missing input
//! file, 5 not converged, 6 I/O or file format, 7 numerical failure,
//! 8 optimality checks failed.

mod cli;
mod commands;
mod config;
mod error;
mod io;
mod syntax;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::error::CliResult;

fn run(cli: &Cli) -> CliResult<()> {
    let config = match &cli.config {
        Some(p) => config::load_config(Path::new(p))?,
        None => Default::default(),
    };
    match &cli.command {
        Command::Solve(a) => commands::solve_cmd(cli, a, config),
        Command::SweepGamma(a) => commands::sweep_gamma_cmd(cli, a, config),
        Command::GammaLimit(a) => commands::gamma_limit_cmd(cli, a, config),
        Command::OrliczNorm(a) => commands::orlicz_norm_cmd(cli, a, config),
        Command::Entropy(a) => commands::entropy_cmd(cli, a, config),
        Command::CheckOptimality(a) => commands::check_optimality_cmd(cli, a, config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
