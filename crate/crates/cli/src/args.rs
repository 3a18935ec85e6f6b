use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "adsim", version, about = "Active-defense engagement simulator and cooperative guidance trainer")]
#[command(after_help = "Exit codes: 0 ok, 2 config or missing input, 3 runtime failure, 4 training divergence.\n\
Outputs go under $ADSIM_OUT (default ./runs) unless --out is given.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Fly one episode and log its trajectory.
    Simulate(SimulateArgs),
    /// Train a team policy with TD3.
    Train(TrainArgs),
    /// Monte-Carlo win rate of one team against one interceptor.
    Evaluate(EvaluateArgs),
    /// Win-rate grid over interceptor acceleration limits and time constants.
    Sweep(SweepArgs),
    /// Win rates under the imperfect-information cases.
    Robustness(RobustnessArgs),
    /// Single-lane inference rate of the team policies.
    Throughput(ThroughputArgs),
    /// Re-run a previous run from its manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Train(_) => "train",
            Command::Evaluate(_) => "evaluate",
            Command::Sweep(_) => "sweep",
            Command::Robustness(_) => "robustness",
            Command::Throughput(_) => "throughput",
            Command::Replay(_) => "replay",
        }
    }

    pub fn common_mut(&mut self) -> Option<&mut Common> {
        match self {
            Command::Simulate(a) => Some(&mut a.common),
            Command::Train(a) => Some(&mut a.common),
            Command::Evaluate(a) => Some(&mut a.common),
            Command::Sweep(a) => Some(&mut a.common),
            Command::Robustness(a) => Some(&mut a.common),
            Command::Throughput(a) => Some(&mut a.common),
            Command::Replay(_) => None,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct Common {
    /// Preset name (table3, table3-desk) or path to a JSON config.
    #[arg(default_value = "table3")]
    pub config: String,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory (default: a fresh timestamped directory under $ADSIM_OUT).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TeamArg {
    Agent,
    Sogl,
    Random,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TeamArgs {
    /// Team policy; defaults to `agent` when a checkpoint is given, else `sogl`.
    #[arg(long)]
    pub team: Option<TeamArg>,
    /// Actor checkpoint: a file, a training run directory, or `final` for
    /// the newest finished training run under the output root.
    #[arg(long)]
    pub checkpoint: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct InterceptorArgs {
    /// Interceptor guidance: none, square, sogl or lqogl (default from config).
    #[arg(long)]
    pub interceptor: Option<String>,
    /// Interceptor acceleration limit, in m/s² or as a g multiple such as `6g`.
    #[arg(long)]
    pub amax: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub team: TeamArgs,
    #[command(flatten)]
    pub interceptor: InterceptorArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardArg {
    Sparse,
    Shaped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub episodes: Option<u64>,
    #[arg(long, value_enum)]
    pub reward: Option<RewardArg>,
    #[arg(long, value_enum)]
    pub curriculum: Option<Switch>,
    /// Rollout workers; 0 uses every core, 1 is sequential and reproducible.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub checkpoint_every: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct McArgs {
    /// Episodes per cell (default from config).
    #[arg(long)]
    pub n: Option<usize>,
    /// First episode seed (default from config).
    #[arg(long)]
    pub seed_base: Option<u64>,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub team: TeamArgs,
    #[command(flatten)]
    pub interceptor: InterceptorArgs,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated teams (default: sogl, plus agent when a checkpoint is given).
    #[arg(long, value_delimiter = ',')]
    pub teams: Vec<TeamArg>,
    /// Actor checkpoint for the agent team.
    #[arg(long)]
    pub checkpoint: Option<String>,
    /// Interceptor guidance (default from config).
    #[arg(long)]
    pub interceptor: Option<String>,
    /// Comma-separated acceleration limits (m/s² or g multiples).
    #[arg(long, value_delimiter = ',', default_value = "2g,4g,6g,8g")]
    pub amax: Vec<String>,
    /// Comma-separated interceptor time constants in seconds.
    #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.1")]
    pub tau: Vec<f64>,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RobustnessArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated teams (default: sogl, plus agent when a checkpoint is given).
    #[arg(long, value_delimiter = ',')]
    pub teams: Vec<TeamArg>,
    #[arg(long)]
    pub checkpoint: Option<String>,
    #[command(flatten)]
    pub interceptor: InterceptorArgs,
    /// Comma-separated case names (reference, mask_only, case1..case6); all when empty.
    #[arg(long, value_delimiter = ',')]
    pub cases: Vec<String>,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ThroughputArgs {
    #[command(flatten)]
    pub common: Common,
    /// Actor checkpoint to time alongside the analytic pair law.
    #[arg(long)]
    pub checkpoint: Option<String>,
    /// Timed single-observation inferences per policy.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// manifest.json of the run to repeat.
    pub manifest: std::path::PathBuf,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}
