use std::process::ExitCode;

use clap::Parser;
use nhspec_cli::config::THREADS_ENV;
use nhspec_cli::{execute, Cli, RunConfig, Status, EXIT_SUCCESS, EXIT_VERIFY_FAILED};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::resolve(cli.command, cli.flags, std::env::var(THREADS_ENV).ok()).and_then(|cfg| execute(&cfg));
    match result {
        Ok(Status::Success) => ExitCode::from(EXIT_SUCCESS),
        Ok(Status::VerificationFailed) => ExitCode::from(EXIT_VERIFY_FAILED),
        Err(e) => {
            eprintln!("nhspec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
