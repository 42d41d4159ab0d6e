use std::process::ExitCode;

use clap::Parser;
use spin7_cli::{configure_threads, execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| execute(cli, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spin7: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
