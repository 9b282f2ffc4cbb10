mod args;
mod commands;

use std::fmt;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use shadow_frontier::RngSeed;

use crate::args::{Cli, ConfigFile};

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<shadow_frontier::Error> for CliError {
    fn from(e: shadow_frontier::Error) -> Self {
        use shadow_frontier::Error as E;
        match e {
            E::NotHermitian { .. } | E::NoMatches | E::AllGroupsEmpty | E::EigensolverFailure(_) => {
                CliError::domain(e.to_string())
            }
            _ => CliError::usage(e.to_string()),
        }
    }
}

/// Main payload plus a one-line human summary.
pub struct Output {
    pub body: String,
    pub summary: String,
}

fn load_config(cli: &Cli) -> Result<ConfigFile, CliError> {
    let Some(path) = &cli.config else { return Ok(ConfigFile::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli)?;
    let seed = match (cli.seed, &config.seed) {
        (Some(s), _) => s,
        (None, Some(s)) => s.parse::<RngSeed>().map_err(|e| CliError::usage(format!("config seed: {e}")))?,
        (None, None) => RngSeed::new(0, 0),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs.or(config.jobs) {
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    let ctx = commands::Context { seed, config };
    let output = pool.install(|| commands::dispatch(cli.command, &ctx))?;
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &output.body)
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
            println!("{}", output.summary);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::usage(format!("cannot write output: {e}")))?;
            eprintln!("{}", output.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
