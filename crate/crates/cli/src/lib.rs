//! The `gfic` command line: `select`, `simulate`, `ci` and `replicate`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
//! failure.

pub mod ci;
mod config;
mod error;
pub mod input;
pub mod output;
pub mod replicate;
pub mod select;
pub mod simulate;

use clap::{Parser, Subcommand};

pub use config::{Format, Method, Opts, RunConfig, DEFAULT_SEED};
pub use error::CliError;
pub use replicate::Replication;

#[derive(Debug, Parser)]
#[command(
    name = "gfic",
    version,
    about = "Focused moment and model selection for panel data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score candidate specifications on a panel and pick one.
    Select(Opts),
    /// Run a named Monte Carlo design.
    Simulate(Opts),
    /// Confidence intervals for a post-selection or fixed estimator.
    Ci(Opts),
    /// Reproduce a reference table.
    Replicate {
        #[arg(value_enum)]
        what: Replication,
        #[command(flatten)]
        opts: Opts,
    },
}

fn init_threads(n: Option<usize>) {
    if let Some(n) = n {
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let (name, opts) = match &cli.command {
        Command::Select(o) => ("select", o),
        Command::Simulate(o) => ("simulate", o),
        Command::Ci(o) => ("ci", o),
        Command::Replicate { opts, .. } => ("replicate", opts),
    };
    let cfg = RunConfig::resolve(name, opts)?;
    init_threads(cfg.threads);
    let text = match &cli.command {
        Command::Select(_) => select::run(&cfg)?,
        Command::Simulate(_) => simulate::run(&cfg)?,
        Command::Ci(_) => ci::run(&cfg)?,
        Command::Replicate { what, .. } => replicate::run(&cfg, *what)?,
    };
    output::emit(&cfg, &text)
}
