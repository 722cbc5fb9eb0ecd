use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ehrenfest::{Rational, SetDescriptor, SimMode, State};

#[derive(Parser, Debug)]
#[command(name = "ehrenfest", version, about = "Hitting times of the N-urn Ehrenfest chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form hitting statistics for a symmetric target.
    Exact(CaseArgs),
    /// The same statistics by solving the enumerated chain.
    Oracle(CaseArgs),
    /// Monte Carlo estimates.
    Simulate(CaseArgs),
    /// Engine vs oracle vs simulation, with verdicts.
    Compare(CaseArgs),
    /// Exact checks of the kernel-function identities.
    Identities(CaseArgs),
    /// Commute times of the count chain against its electric network.
    NetworkCheck(NetworkArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct CaseArgs {
    /// Number of urns.
    #[arg(long = "N", value_name = "N")]
    pub urns: u32,

    /// Number of balls.
    #[arg(long = "M", value_name = "M")]
    pub balls: u32,

    /// Start state, e.g. `1,2,2`.
    #[arg(long)]
    pub start: Option<State>,

    /// Target set: singleton:…, pair:(…);(…), diagonal, count:h[:urn],
    /// distinct or explicit:[[…],…] / explicit:@file.json.
    #[arg(long)]
    pub set: Option<SetDescriptor>,

    /// λ-domain transform arguments.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambda: Vec<f64>,

    /// u-domain transform arguments, as rationals.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub u: Vec<Rational>,

    /// Highest raw moment reported.
    #[arg(long, default_value_t = 2)]
    pub order: usize,

    #[arg(long, default_value_t = 100_000)]
    pub replicas: u64,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// discrete or ctmc.
    #[arg(long, default_value_t = SimMode::Discrete)]
    pub mode: SimMode,

    /// Significant digits for λ-domain values.
    #[arg(long, default_value_t = 20)]
    pub digits: u32,

    /// Largest N^M the oracle will enumerate.
    #[arg(long, env = "EHRENFEST_CAP", default_value_t = 2000)]
    pub cap: u128,

    /// Simulation threads; never changes results.
    #[arg(long)]
    pub workers: Option<usize>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Include wall-clock timing in the report.
    #[arg(long)]
    pub timing: bool,

    /// Perturb engine means before comparison (harness self-test).
    #[arg(long, hide = true)]
    pub corrupt_engine: bool,
}

#[derive(Args, Debug, Clone)]
pub struct NetworkArgs {
    #[command(flatten)]
    pub case: CaseArgs,

    /// Lower level; all pairs when omitted.
    #[arg(long)]
    pub h: Option<u32>,

    /// Upper level; all pairs when omitted.
    #[arg(long)]
    pub k: Option<u32>,
}
