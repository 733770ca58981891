use std::process::ExitCode;

use clap::Parser;
use tracing_subscriber::EnvFilter;
use wxline_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match wxline_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wxline: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
