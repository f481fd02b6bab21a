//! `discern`: batch front end for two-state discrimination.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid input, 3 numerical invariant
//! violated.

mod cli;
mod commands;
mod config;
mod failure;
mod input;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::failure::{CliResult, Failure};

fn run(cli: Cli) -> CliResult<Option<Failure>> {
    let (config, destination) = match &cli.command {
        Command::Rerun(r) => (output::load_echo(&r.file)?, r.output.clone()),
        command => {
            let config = config::from_command(command)?;
            let destination = config.output_path.clone();
            (config, destination)
        }
    };
    let report = commands::execute(&config)?;
    let text = output::render(&config, &report)?;
    output::emit(destination.as_deref(), &text)?;
    eprintln!("{}", report.summary);
    Ok(report.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) | Err(failure) => {
            eprintln!("discern: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
