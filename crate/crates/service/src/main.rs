use std::process::ExitCode;

use clap::Parser;

use workcell_service::cli::{run, Cli};

fn main() -> ExitCode {
    // usage errors exit with 2 inside clap
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
