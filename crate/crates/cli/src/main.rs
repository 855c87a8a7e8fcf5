//! `crowdsense`: generate scenarios, run policy sweeps and measure regret.
//!
//! Exit codes: 0 success, 1 I/O failure or failed runs, 2 invalid input,
//! 3 regret instance too large to enumerate.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use config::Purpose;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Guard(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Guard(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Guard(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<crowdsense::Error> for CliError {
    fn from(e: crowdsense::Error) -> Self {
        use crowdsense::Error as E;
        match e {
            E::EnumerationGuard { .. } => CliError::Guard(e.to_string()),
            E::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "crowdsense", version, about = "Budgeted worker recruitment experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file, overriding the configured one.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (0 uses every core).
    #[arg(long, value_name = "N", default_value_t = 0)]
    jobs: usize,
    /// Replace the configured seed list with this single seed.
    #[arg(long, value_name = "N")]
    seed_override: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a scenario and write it as a scenario_v1 JSON file.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Mobility trace CSV to build from instead of a synthetic city.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Run every policy, seed and sweep cell; write a CSV and a JSON summary.
    Run(Common),
    /// Measure alpha-regret over a budget grid on a small instance.
    Regret(Common),
}

fn with_pool<T>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Generate { common, trace } => {
            let out = commands::generate(
                common.config.as_deref(),
                trace.as_deref(),
                common.out.as_deref(),
                common.seed_override,
            )?;
            info!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(common) => {
            let cfg = commands::resolve(common.config.as_deref(), Purpose::Run, common.out.as_deref(), common.seed_override)?;
            let report = with_pool(common.jobs, || commands::run(&cfg))??;
            info!("wrote {} and {}", report.csv.display(), report.summary.display());
            if report.failures > 0 {
                eprintln!("{} runs failed; see the status column of {}", report.failures, report.csv.display());
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Regret(common) => {
            let cfg = commands::resolve(
                common.config.as_deref(),
                Purpose::Regret,
                common.out.as_deref(),
                common.seed_override,
            )?;
            let (csv, summary) = with_pool(common.jobs, || commands::regret(&cfg))??;
            info!("wrote {} and {}", csv.display(), summary.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
