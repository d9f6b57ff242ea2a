use std::process::ExitCode;

use clap::Parser;
use fwlink_cli::Cli;

fn main() -> ExitCode {
    // Usage errors exit with 2 through clap; runtime failures exit with 1.
    let cli = Cli::parse();
    match fwlink_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
