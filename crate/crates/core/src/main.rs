use std::process::ExitCode;

use clap::Parser;
use groupscore::cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    let result = RunConfig::from_cli(Cli::parse()).and_then(|config| run(&config));
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            for file in &outcome.files {
                eprintln!("wrote {}", file.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            for line in e.details() {
                eprintln!("  {line}");
            }
            ExitCode::FAILURE
        }
    }
}
