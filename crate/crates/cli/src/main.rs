mod args;
mod commands;
mod config;
mod quantity;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::Config;

/// Bad flags, names or files: exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<harmonium::Error>() {
        Some(
            harmonium::Error::NoBoundState { .. }
            | harmonium::Error::InvalidParameter(_)
            | harmonium::Error::InvalidBipartition { .. },
        ) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(jobs) = cli.jobs.or(cfg.jobs) {
        if jobs == 0 {
            return Err(UsageError("--jobs must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Eval(a) => commands::eval(a, &cfg)?,
        Command::Sweep(a) => commands::sweep(a, &cfg)?,
        Command::Grid(a) => commands::grid(a, &cfg)?,
        Command::Verify(a) => return commands::verify(a, &cfg),
        Command::Quantities => commands::quantities()?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
