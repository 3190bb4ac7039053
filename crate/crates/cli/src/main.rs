//! `solitaire`: command-line front end of the workbench.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 usage error, 3 data error,
//! 4 acceptance failure.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("solitaire: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
