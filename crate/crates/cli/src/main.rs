//! `fva-pricer`: bid/ask pricing with funding costs from the command line.

mod args;
mod commands;
mod config_file;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn main() -> ExitCode {
    let argv = match config_file::expand(std::env::args_os().collect()) {
        Ok(argv) => argv,
        Err(e) => return report(e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let outcome = match &cli.command {
        Command::Price(a) => commands::price::run(a)?,
        Command::FvaCurve(a) => commands::curve::run(a)?,
        Command::Netting(a) => commands::netting::run(a)?,
        Command::Table1(a) => commands::table1::run(a)?,
        Command::Simulate(a) => commands::simulate::run(a)?,
        Command::Table2(a) => commands::table2::run(a)?,
    };
    let text = outcome.table.render(cli.format);
    match &cli.output {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| CliError::usage("--output", format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::usage("--output", format!("cannot write to stdout: {e}")))?;
        }
    }
    match outcome.breach {
        Some(msg) => Err(CliError::Tolerance(msg)),
        None => Ok(()),
    }
}

fn report(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}
