//! The `wxline` command: simulated nodes, the collector with its web front
//! end, and offline tools over the daily logs.

pub mod args;
pub mod commands;
pub mod config;

use thiserror::Error;
use wxline::ConfigError;

pub use args::Cli;
pub use config::Settings;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn runtime(context: &str, e: impl std::fmt::Display) -> CliError {
        CliError::Runtime(format!("{context}: {e}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// Resolves the configuration and runs the chosen subcommand to completion.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(cli.config.as_deref(), &cli.overrides())?;
    match cli.command {
        args::Command::Stats(args) => {
            let text = commands::stats::run(&settings, &args)?;
            print!("{text}");
            Ok(())
        }
        args::Command::Node(_) => commands::runtime()?.block_on(commands::node::run(&settings)),
        args::Command::Collect(_) => commands::runtime()?.block_on(commands::collect::run(&settings)),
        args::Command::Replay(args) => commands::runtime()?.block_on(commands::replay::run(&settings, &args)),
    }
}
