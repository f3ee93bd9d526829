mod args;
mod commands;
mod failure;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Globals;
use failure::Failure;

fn run(cli: Cli) -> Result<(), Failure> {
    let g = Globals {
        seed: cli.seed,
        jobs: cli.jobs,
        out: cli.out,
    };
    match &cli.command {
        Command::Gen(a) => commands::gen(&g, a),
        Command::Rank(a) => commands::rank(&g, a),
        Command::Eval(a) => commands::eval(&g, a),
        Command::Bench(a) => commands::bench(&g, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("{}", Failure::usage(first).line());
            return ExitCode::from(failure::EXIT_USAGE as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.exit as u8)
        }
    }
}
