//! Command-line front end: config ingestion, dispatch and CSV/text emission.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use error::CliError;
pub use output::Format;

/// Environment variable capping worker threads (0 = one per core).
pub const THREADS_ENV: &str = "GAUSS_SHARE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gauss-share", version, about = "Secret-sharing capacity of Gaussian sources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity at each requested public rate
    Capacity(Common),
    /// Capacity sweep over an rp grid, ending with the unlimited-rate value
    Region(Common),
    /// Capacity of every threshold structure plus pairwise ordering verdicts
    Threshold(Common),
    /// Monte Carlo run of the quantize, reconcile and hash scheme
    Simulate(Common),
    /// Grid-search check of the minimax characterization
    Oracle(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output file (stdout when absent)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Overrides the simulation seed
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Capacity(c)
            | Command::Region(c)
            | Command::Threshold(c)
            | Command::Simulate(c)
            | Command::Oracle(c) => c,
        }
    }
}

/// Sizes the global worker pool from the value of [`THREADS_ENV`].
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(value) = value else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Threads(format!("expected a thread count, got {value:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    Ok(())
}

/// Runs one command, writing to `--out`, the config's output path, or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let common = cli.command.common();
    let cfg = RunConfig::load(&common.config)?;
    let format = common.format.or(cfg.format).unwrap_or(Format::Csv);
    let path = common.out.clone().or_else(|| cfg.out.clone());
    let mut file;
    let sink: &mut dyn Write = match &path {
        Some(p) => {
            file = BufWriter::new(File::create(p).map_err(|e| CliError::Io {
                path: p.display().to_string(),
                source: e,
            })?);
            &mut file
        }
        None => stdout,
    };
    match &cli.command {
        Command::Capacity(_) => commands::capacity(&cfg, format, &mut *sink),
        Command::Region(_) => commands::region(&cfg, format, &mut *sink),
        Command::Threshold(_) => commands::threshold(&cfg, format, &mut *sink),
        Command::Simulate(c) => commands::simulate(&cfg, c.seed, format, &mut *sink),
        Command::Oracle(_) => commands::oracle(&cfg, format, &mut *sink),
    }?;
    sink.flush().map_err(|e| CliError::Io {
        path: path.map_or_else(|| "stdout".into(), |p| p.display().to_string()),
        source: e,
    })
}
