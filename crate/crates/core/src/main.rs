use std::process::ExitCode;

use clap::Parser;
use gridsynth::cli::{run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
