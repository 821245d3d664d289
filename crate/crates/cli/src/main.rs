mod args;
mod commands;
mod config;
mod error;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

fn main() -> ExitCode {
    let raw: Vec<_> = std::env::args_os().collect();
    let argv = if raw.len() >= 2 {
        match config::expand_args(raw) {
            Ok(a) => a,
            Err(e) => {
                eprintln!("error: {e}");
                return e.exit_code();
            }
        }
    } else {
        raw
    };

    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        // clap exits 0 for --help/--version and 2 for usage errors.
        Err(e) => e.exit(),
    };

    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
