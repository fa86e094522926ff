use std::process::ExitCode;

use clap::Parser;
use john_cli::{configure_threads, error_json, run, Cli, RunRequest};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|()| RunRequest::try_from(cli)).and_then(|req| run(&req));
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("{}", error_json(&err));
            ExitCode::from(2)
        }
    }
}
