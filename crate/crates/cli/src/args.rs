use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpisde::stability::StabilityCondition;
use qpisde::{MilsteinSign, SchemeId};

#[derive(Debug, Parser)]
#[command(
    name = "qpisde",
    version,
    about = "Simulate geometric Brownian motion with the quadratic-interpolation block scheme \
             and reproduce convergence tables and stability regions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one or more sample paths and write them next to the exact solution.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Mean strong errors of several schemes over a list of step counts.
    #[command(args_override_self = true)]
    Converge(ConvergeArgs),
    /// Scan the (mu, dt) plane for mean-square stability at fixed sigma.
    #[command(args_override_self = true)]
    Stability(StabilityArgs),
    /// Mean-square one-block error of the QPI scheme against step size.
    #[command(name = "local-error", args_override_self = true)]
    LocalError(LocalErrorArgs),
    /// Dump a seeded Wiener path as `t,w` CSV.
    #[command(args_override_self = true)]
    Path(PathArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Standard,
    Paper,
}

impl From<SignArg> for MilsteinSign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Standard => MilsteinSign::Standard,
            SignArg::Paper => MilsteinSign::Paper,
        }
    }
}

/// Options every subcommand shares.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// `key=value` file with defaults for any long flag of this subcommand.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Drift rate.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub mu: f64,
    /// Volatility.
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    /// Initial value.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Time horizon.
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of time steps.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Scheme: qpi, em, iem or milstein.
    #[arg(long, default_value = "qpi")]
    pub scheme: SchemeId,
    /// Number of sample paths.
    #[arg(long, default_value_t = 1)]
    pub paths: usize,
    /// Master seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Sign of the Milstein correction.
    #[arg(long, value_enum, default_value = "standard")]
    pub milstein_sign: SignArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Ascending step counts; each must divide the last.
    #[arg(long, default_value = "4,16,64,256,1024")]
    pub n_list: NList,
    /// Schemes to compare.
    #[arg(long, default_value = "qpi,iem,milstein")]
    pub schemes: SchemeList,
    /// Number of sample paths averaged per row.
    #[arg(long, default_value_t = 500)]
    pub paths: usize,
    /// Master seed.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Sign of the Milstein correction.
    #[arg(long, value_enum, default_value = "standard")]
    pub milstein_sign: SignArg,
    /// Also write one wide table per norm next to the output file.
    #[arg(long)]
    pub split_norms: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Condition: qpi-paper, qpi-exact, iem or milstein.
    #[arg(long, default_value = "qpi-paper")]
    pub scheme: StabilityCondition,
    /// Volatility.
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    /// Drift axis as lo:hi.
    #[arg(long, default_value = "-4:1", allow_hyphen_values = true)]
    pub mu_range: Range,
    /// Step-size axis as lo:hi.
    #[arg(long, default_value = "0.01:1")]
    pub dt_range: Range,
    /// Points per axis.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Sign of the Milstein correction.
    #[arg(long, value_enum, default_value = "standard")]
    pub milstein_sign: SignArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct LocalErrorArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Step sizes, comma separated.
    #[arg(
        long,
        default_value = "0.125,0.0625,0.03125,0.015625,0.0078125,0.00390625"
    )]
    pub dt_list: DtList,
    /// Monte Carlo samples per step size.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Master seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    /// Number of increments.
    #[arg(long, default_value_t = 1024)]
    pub n: usize,
    /// Time horizon.
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NList(pub Vec<usize>);

impl FromStr for NList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        split_list(s)
            .map(|p| p.parse().map_err(|_| format!("'{p}' is not a step count")))
            .collect::<Result<_, _>>()
            .map(NList)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeList(pub Vec<SchemeId>);

impl FromStr for SchemeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        split_list(s)
            .map(|p| p.parse::<SchemeId>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()
            .map(SchemeList)
    }
}

/// Comma-separated step sizes. Parsing never fails on an empty string so
/// the emptiness check reports through the normal validation path.
#[derive(Debug, Clone, PartialEq)]
pub struct DtList(pub Vec<f64>);

impl FromStr for DtList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        split_list(s)
            .map(|p| p.parse().map_err(|_| format!("'{p}' is not a number")))
            .collect::<Result<_, _>>()
            .map(DtList)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("'{s}' is not a lo:hi range"))?;
        let lo = lo
            .trim()
            .parse()
            .map_err(|_| format!("bad lower bound in '{s}'"))?;
        let hi = hi
            .trim()
            .parse()
            .map_err(|_| format!("bad upper bound in '{s}'"))?;
        Ok(Range { lo, hi })
    }
}
