use std::process::ExitCode;

use cellform_cli::commands::{run, Cli};
use clap::Parser;

fn init_logging() {
    let level = std::env::var("CELLFORM_LOG").unwrap_or_else(|_| "off".to_owned());
    env_logger::Builder::new()
        .parse_filters(&level)
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
