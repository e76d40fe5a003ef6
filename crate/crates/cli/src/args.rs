use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "leggett",
    version,
    about = "Evaluate, scan and optimize multipartite Leggett-type inequalities"
)]
pub struct Cli {
    /// Worker threads for parallel work; 0 uses every core.
    #[arg(long, global = true, env = "LEGGETT_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Read every angle flag in degrees instead of radians.
    #[arg(long, global = true)]
    pub degrees: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Evaluate the inequality for one state and one configuration.
    Evaluate(EvaluateArgs),
    /// Scan the generalized W family over a (xi, eta) grid.
    ScanW(ScanWArgs),
    /// Tabulate the GHZ value against theta under the standard settings.
    ScanTheta(ScanThetaArgs),
    /// Maximize the inequality over states, settings and theta.
    Optimize(OptimizeArgs),
    /// Run the hidden-variable verification suite.
    VerifyNlhv(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Evaluate(_) => "evaluate",
            Self::ScanW(_) => "scan-w",
            Self::ScanTheta(_) => "scan-theta",
            Self::Optimize(_) => "optimize",
            Self::VerifyNlhv(_) => "verify-nlhv",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ghz,
    W3,
    Arbitrary3,
    /// Every amplitude free; only meaningful for `optimize`.
    Generic,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StateArgs {
    /// State family.
    #[arg(long, value_enum, conflicts_with = "state_file")]
    pub family: Option<Family>,

    /// Qubit count for the ghz and generic families.
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,

    /// Five comma-separated weights of the canonical three-qubit form.
    #[arg(long, value_delimiter = ',')]
    pub mu: Option<Vec<f64>>,

    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,

    /// State description as JSON, e.g. {"family": "ghz", "n": 3}.
    #[arg(long)]
    pub state_file: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("settings").required(true).args(["config", "reference_settings", "ghz_settings"])))]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub state: StateArgs,

    /// Measurement configuration as JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Three-party reference settings at --theta.
    #[arg(long, requires = "theta")]
    pub reference_settings: bool,

    /// n-party GHZ settings at --theta.
    #[arg(long, requires = "theta")]
    pub ghz_settings: bool,

    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,

    /// Also write the report to this file, with a manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    /// Reference settings at a fixed theta. Every correlation term of a
    /// W-family state vanishes for these settings.
    Fixed,
    /// Settings and theta maximized at every grid point.
    Optimized,
}

#[derive(Args, Debug, Serialize)]
pub struct ScanWArgs {
    #[arg(long, value_enum, default_value_t = ScanMode::Optimized)]
    pub mode: ScanMode,

    /// Theta for fixed mode [default: 2 arctan(1/3)].
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,

    /// [default: pi/12]
    #[arg(long, allow_hyphen_values = true)]
    pub xi_min: Option<f64>,
    /// [default: pi/2]
    #[arg(long, allow_hyphen_values = true)]
    pub xi_max: Option<f64>,
    #[arg(long, default_value_t = 6)]
    pub xi_points: usize,

    /// [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub eta_min: Option<f64>,
    /// [default: pi/2]
    #[arg(long, allow_hyphen_values = true)]
    pub eta_max: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub eta_points: usize,

    /// Restarts per grid point in optimized mode. The first restart at each
    /// point starts from the optimum of its predecessor along eta.
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, default_value_t = leggett_core::optimizer::DEFAULT_MAX_EVALS)]
    pub max_evals: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value = "scan_w.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ScanThetaArgs {
    /// Uniform grid over [0, pi] with this many points. Without it the grid
    /// is 1-degree steps plus the peak and the upper window edge.
    #[arg(long)]
    pub points: Option<usize>,

    #[arg(long, default_value = "scan_theta.csv")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingsChoice {
    Free,
    Reference,
    GhzOptimal,
}

#[derive(Args, Debug, Serialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub state: StateArgs,

    #[arg(long, value_enum, default_value_t = SettingsChoice::Free, conflicts_with = "config")]
    pub settings: SettingsChoice,

    /// Same as --settings free.
    #[arg(long, conflicts_with_all = ["settings", "config"])]
    pub free_settings: bool,

    /// Keep this configuration fixed, theta included.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Fix theta instead of searching it.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "config")]
    pub theta: Option<f64>,

    #[arg(long, default_value_t = leggett_core::optimizer::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = leggett_core::optimizer::DEFAULT_MAX_EVALS)]
    pub max_evals: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value = "optimize.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Sampled models; the step and triangle checks run ten times as many.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub cases: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Also write the report to this file, with a manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
