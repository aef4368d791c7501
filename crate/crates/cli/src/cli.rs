use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isac_core::iid::Allocation;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "isac", version, about = "Rate-exponent and rate-probability tradeoffs for joint sensing and communication")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Fixed-state region: rate against false-alarm and missed-detection exponents.
    RegionFixed(RegionFixedArgs),
    /// I.i.d.-state region: rate against detection probability under a false-alarm budget.
    RegionIid(RegionIidArgs),
    /// Monte Carlo run of the likelihood-ratio detectors.
    Simulate(SimulateArgs),
    /// Neyman-Pearson ROC of one input symbol.
    Roc(RocArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::RegionFixed(_) => "region-fixed",
            Command::RegionIid(_) => "region-iid",
            Command::Simulate(_) => "simulate",
            Command::Roc(_) => "roc",
            Command::Replay(_) => "replay",
        }
    }

    pub fn common(&self) -> Option<&Common> {
        match self {
            Command::RegionFixed(a) => Some(&a.common),
            Command::RegionIid(a) => Some(&a.common),
            Command::Simulate(a) => Some(&a.common),
            Command::Roc(a) => Some(&a.common),
            Command::Replay(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Bits,
    Nats,
}

impl Units {
    pub fn scale(self, nats: f64) -> f64 {
        match self {
            Units::Bits => isac_core::info::to_bits(nats),
            Units::Nats => nats,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Units::Bits => "bits",
            Units::Nats => "nats",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Common {
    /// Channel configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, default_value = "isac-out")]
    pub out: PathBuf,
    /// Units for rates and exponents; probabilities are unitless.
    #[arg(long, value_enum, default_value_t = Units::Bits)]
    pub units: Units,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RegionFixedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Number of tilt parameters on the open grid i/(K+1), i = 1..K.
    #[arg(long, default_value_t = 101)]
    pub grid_u: usize,
    /// Simplex step for input distributions; 1/step must be an integer.
    #[arg(long, default_value_t = 0.01)]
    pub grid_t: f64,
    /// Number of covariance mixing weights on [0, 1] for vector Gaussian channels.
    #[arg(long, default_value_t = 21)]
    pub grid_lambda: usize,
    /// Quantize Gaussian channels and run the finite-alphabet sweep instead of the closed form.
    #[arg(long)]
    pub generic: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RegionIidArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Averaged false-alarm budgets, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub grid_t: f64,
    /// Pour size of the waterfilling allocator.
    #[arg(long, default_value_t = isac_core::iid::DEFAULT_DELTA)]
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fixed,
    Iid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    Counts,
    PerSymbol,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Trials per blocklength (and per state in fixed mode).
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Blocklengths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
    pub n: Vec<usize>,
    /// Input composition weights, comma separated; uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    pub px: Option<Vec<f64>>,
    /// Fixed mode: tilt whose threshold κ₀′(u) is used.
    #[arg(long, default_value_t = 0.5)]
    pub u: f64,
    /// Fixed mode: explicit normalized LLR threshold, overriding `--u`.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long, value_enum, default_value_t = Sampling::Counts)]
    pub sampling: Sampling,
    /// I.i.d. mode: allocation JSON written by `region-iid`.
    #[arg(long)]
    pub allocation: Option<PathBuf>,
    /// I.i.d. mode: budget selecting the allocation, or computing one with `--px`.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// I.i.d. mode: grid index selecting an allocation from the file.
    #[arg(long)]
    pub px_index: Option<usize>,
    /// Resolved allocation, recorded for replay.
    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_allocation: Option<Allocation>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RocArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Input symbol label or index.
    #[arg(long)]
    pub symbol: String,
    /// Threshold samples for continuous-output channels.
    #[arg(long, default_value_t = isac_core::iid::DEFAULT_GAUSSIAN_SAMPLES)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "isac-out")]
    pub out: PathBuf,
}
