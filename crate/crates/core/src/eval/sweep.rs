use std::path::Path;

use serde::Serialize;

use super::{win_rate, Adversary, PolicySpec, TeamPolicy, WinRateReport};
use crate::env::{EnvConfig, EpisodeOutcome, ObservationModel};
use crate::error::SimError;
use crate::guidance::AnalyticPolicy;
use crate::par::Par;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub team: String,
    pub max_accel: f64,
    pub time_constant: f64,
    pub report: WinRateReport,
    #[serde(skip)]
    pub outcomes: Vec<EpisodeOutcome>,
}

/// Win rate of every team over the grid of interceptor capability
/// `max_accels × time_constants`; all cells share the same seeds.
#[allow(clippy::too_many_arguments)]
pub fn sweep_adaptiveness(
    teams: &[TeamPolicy],
    interceptor: &AnalyticPolicy,
    base: &EnvConfig,
    max_accels: &[f64],
    time_constants: &[f64],
    n: usize,
    seed_base: u64,
    par: Par,
) -> Result<Vec<SweepCell>, SimError> {
    let mut cells = Vec::new();
    for team in teams {
        for &max_accel in max_accels {
            for &tau in time_constants {
                let mut cfg = base.clone();
                cfg.engagement.interceptor.time_constant = tau;
                let spec = PolicySpec {
                    team: team.clone(),
                    adversary: Adversary { policy: interceptor.clone(), max_accel },
                    observation: ObservationModel::default(),
                };
                let (report, outcomes) = win_rate(&spec, &cfg, n, seed_base, par)?;
                cells.push(SweepCell { team: team.label().into(), max_accel, time_constant: tau, report, outcomes });
            }
        }
    }
    Ok(cells)
}

pub fn write_sweep_csv(path: &Path, cells: &[SweepCell]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["team", "max_accel", "time_constant", "n", "wins", "rate", "ci_lo", "ci_hi", "mean_miss_id"])?;
    for c in cells {
        let r = &c.report;
        w.write_record([
            c.team.clone(),
            c.max_accel.to_string(),
            c.time_constant.to_string(),
            r.n.to_string(),
            r.wins.to_string(),
            r.rate.to_string(),
            r.ci95[0].to_string(),
            r.ci95[1].to_string(),
            r.mean_miss_id.to_string(),
        ])?;
    }
    w.flush()
}
