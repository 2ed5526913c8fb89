//! `semisup`: estimate joint pmfs from labeled + unlabeled samples, run
//! risk sweeps, verification suites and bound tables.
//!
//! | Exit code | Meaning                     |
//! |-----------|-----------------------------|
//! | 0         | success                     |
//! | 1         | a verification check failed |
//! | 2         | usage or configuration error|
//! | 3         | data error                  |

mod bounds;
mod config;
mod error;
mod estimate;
mod output;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "semisup", version, about = "Semi-supervised minimax estimation of discrete joint distributions")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Base seed for every Monte Carlo run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo trials per risk estimate.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Floor δ of the restricted simplex used with f-divergence losses.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV output.
    #[arg(long, global = true, conflicts_with = "json")]
    pub csv: bool,
    /// JSON output.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a joint pmf from a sample file with header `x,y` (empty y = unlabeled).
    Estimate(estimate::EstimateArgs),
    /// Run the semi-supervised risk over an (m, n) grid described by a TOML config.
    Sweep(sweep::SweepArgs),
    /// Run a verification suite: lp, fdiv, bounds or all.
    Verify(verify::VerifyArgs),
    /// Tabulate H^n_p, G^n_p, their gap and the first-order prediction.
    Bounds(bounds::BoundsArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Estimate(a) => estimate::run(a, &cli.global),
        Command::Sweep(a) => sweep::run(a, &cli.global),
        Command::Verify(a) => verify::run(a, &cli.global),
        Command::Bounds(a) => bounds::run(a, &cli.global),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn parse_estimator(s: &str) -> Result<semisup::estimators::EstimatorSpec, CliError> {
    s.parse()
        .map_err(|e: semisup::Error| CliError::Usage(format!("estimator '{s}': {e}")))
}
