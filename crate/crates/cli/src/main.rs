//! `isac`: sweeps, simulations and ROC tables for the sensing-communication engine.

mod cli;
mod output;
mod region;
mod roc;
mod simulate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use isac_core::channels::ChannelConfig;

use cli::{Cli, Command};
use output::{Manifest, Run};

/// Exit code 1 for computation failures, 2 for usage and configuration failures.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<isac_core::Error> for CliError {
    fn from(e: isac_core::Error) -> Self {
        match e {
            isac_core::Error::Usage(_) | isac_core::Error::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Compute(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn load_config(path: &Path) -> CliResult<ChannelConfig> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config `{}`: {e}", path.display())))?;
    ChannelConfig::from_json_str(&src).map_err(|e| CliError::Usage(format!("config `{}`: {e}", path.display())))
}

fn execute(command: Command, config: ChannelConfig, out: &Path) -> CliResult<PathBuf> {
    let mut run = Run::new(out)?;
    let params = match &command {
        Command::RegionFixed(a) => region::region_fixed(a, &config, &mut run)?,
        Command::RegionIid(a) => region::region_iid(a, &config, &mut run)?,
        Command::Simulate(a) => simulate::simulate(a, &config, &mut run)?,
        Command::Roc(a) => roc::roc(a, &config, &mut run)?,
        Command::Replay(_) => unreachable!("replay resolves to a concrete command"),
    };
    Manifest::new(params, &config, run).write(out)
}

fn dispatch(cli: Cli) -> CliResult<PathBuf> {
    match cli.command {
        Command::Replay(r) => {
            let (command, config) = output::read_manifest(&r.manifest)?;
            execute(command, config, &r.out)
        }
        command => {
            let common = command.common().expect("non-replay commands carry common args").clone();
            let config = load_config(&common.config)?;
            execute(command, config, &common.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(manifest) => {
            eprintln!("wrote {}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
