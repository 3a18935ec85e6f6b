//! Monte-Carlo evaluation: win rates with Wilson intervals, adaptiveness
//! sweeps, the imperfect-information grid and inference throughput.

mod robustness;
mod sweep;
mod throughput;

pub use robustness::{robustness_grid, imperfect_info_cases, write_robustness_csv, NoiseCase, RobustnessCell};
pub use sweep::{sweep_adaptiveness, write_sweep_csv, SweepCell};
pub use throughput::{throughput, throughput_agent, throughput_sogl, Throughput};

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{CurriculumStage, Engagement, EnvConfig, EpisodeOutcome, ObservationModel, TeamControl, TrajectoryRow};
use crate::error::SimError;
use crate::guidance::AnalyticPolicy;
use crate::nn::Mlp;
use crate::par::Par;
use crate::seeding::{self, Stream};
use crate::td3::policy_action;

/// Two-sided 95% standard-normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Who commands the protected pair.
#[derive(Debug, Clone)]
pub enum TeamPolicy {
    Agent(Arc<Mlp>),
    /// Bang-bang pair law evaluated every physics tick.
    SoglPair,
    /// Uniform random normalized commands each decision.
    Random,
}

impl TeamPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            TeamPolicy::Agent(_) => "agent",
            TeamPolicy::SoglPair => "sogl",
            TeamPolicy::Random => "random",
        }
    }
}

/// Interceptor flown in evaluation episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adversary {
    pub policy: AnalyticPolicy,
    pub max_accel: f64,
}

impl Adversary {
    pub fn stage(&self) -> CurriculumStage {
        CurriculumStage { stage: 3, interceptor_policy: self.policy.clone(), interceptor_max_accel: self.max_accel }
    }
}

#[derive(Debug, Clone)]
pub struct PolicySpec {
    pub team: TeamPolicy,
    pub adversary: Adversary,
    pub observation: ObservationModel,
}

#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub seed: u64,
    pub outcome: EpisodeOutcome,
    pub trajectory: Vec<TrajectoryRow>,
}

/// One full episode; deterministic in `seed`.
pub fn run_episode(spec: &PolicySpec, base: &EnvConfig, seed: u64, record: bool) -> Result<EpisodeRun, SimError> {
    let cfg = EnvConfig { observation: spec.observation, ..base.clone() };
    let mut env = Engagement::new(cfg)?;
    env.set_recording(record);
    let mut rng = seeding::rng(seed, Stream::Exploration);
    let mut obs = env.reset(&spec.adversary.stage(), seed);
    loop {
        let control = match &spec.team {
            TeamPolicy::Agent(actor) => TeamControl::Hold(policy_action(actor, &obs)),
            TeamPolicy::SoglPair => TeamControl::Sogl,
            TeamPolicy::Random => TeamControl::Hold([rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]),
        };
        let r = env.advance(control)?;
        obs = r.observation;
        if let Some(outcome) = r.outcome {
            return Ok(EpisodeRun { seed, outcome, trajectory: env.trajectory().to_vec() });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRateReport {
    pub n: usize,
    pub wins: usize,
    pub rate: f64,
    pub ci95: [f64; 2],
    pub mean_miss_id: f64,
    /// Mean `|y_IT(t_IT)|` over episodes where the interceptor survived.
    pub mean_miss_it: Option<f64>,
    pub interceptor_destroyed: usize,
    pub seed_base: u64,
}

/// Wilson score interval for `wins` successes in `n` trials.
pub fn wilson(wins: usize, n: usize, z: f64) -> [f64; 2] {
    if n == 0 {
        return [0.0, 1.0];
    }
    let n_f = n as f64;
    let p = wins as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    [(centre - half).max(0.0), (centre + half).min(1.0)]
}

impl WinRateReport {
    pub fn from_outcomes(outcomes: &[EpisodeOutcome], seed_base: u64) -> Self {
        let n = outcomes.len();
        let wins = outcomes.iter().filter(|o| o.success).count();
        let survivors: Vec<f64> = outcomes.iter().filter_map(|o| o.miss_it).collect();
        Self {
            n,
            wins,
            rate: if n == 0 { 0.0 } else { wins as f64 / n as f64 },
            ci95: wilson(wins, n, Z95),
            mean_miss_id: outcomes.iter().map(|o| o.miss_id).sum::<f64>() / n.max(1) as f64,
            mean_miss_it: (!survivors.is_empty()).then(|| survivors.iter().sum::<f64>() / survivors.len() as f64),
            interceptor_destroyed: outcomes.iter().filter(|o| o.interceptor_destroyed).count(),
            seed_base,
        }
    }
}

/// Runs seeds `seed_base..seed_base + n` and reduces them in seed order.
pub fn win_rate(
    spec: &PolicySpec,
    base: &EnvConfig,
    n: usize,
    seed_base: u64,
    par: Par,
) -> Result<(WinRateReport, Vec<EpisodeOutcome>), SimError> {
    let runs = par.map(n, |i| run_episode(spec, base, seed_base + i as u64, false).map(|r| r.outcome));
    let outcomes = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok((WinRateReport::from_outcomes(&outcomes, seed_base), outcomes))
}

/// One JSON object per line: the seed followed by the outcome fields.
pub fn write_outcomes_jsonl(path: &Path, seed_base: u64, outcomes: &[EpisodeOutcome]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (i, o) in outcomes.iter().enumerate() {
        let mut v = serde_json::to_value(o)?;
        v.as_object_mut().expect("outcome is an object").insert("seed".into(), (seed_base + i as u64).into());
        serde_json::to_writer(&mut f, &v)?;
        writeln!(f)?;
    }
    f.flush()
}

pub fn read_outcomes_jsonl(path: &Path) -> std::io::Result<Vec<EpisodeOutcome>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l)?;
            v.as_object_mut().map(|m| m.remove("seed"));
            Ok(serde_json::from_value(v)?)
        })
        .collect()
}
