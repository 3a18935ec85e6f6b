use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{win_rate, Adversary, PolicySpec, TeamPolicy, WinRateReport};
use crate::env::{EnvConfig, EpisodeOutcome, NoiseSpec, ObservationMode, ObservationModel};
use crate::error::SimError;
use crate::par::Par;

/// One cell of the imperfect-information grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseCase {
    /// Table row (`case1`..`case6`) or a reference label.
    pub case: String,
    pub noise: NoiseSpec,
    pub mask: bool,
}

impl NoiseCase {
    pub fn model(&self) -> ObservationModel {
        ObservationModel { mode: ObservationMode::Imperfect, noise: self.noise, mask_prior: self.mask }
    }

    pub fn label(&self) -> String {
        format!("{}:y{}:v{}:a{}{}", self.case, self.noise.sigma_y, self.noise.sigma_v, self.noise.sigma_a, if self.mask { ":mask" } else { "" })
    }
}

/// The six imperfect-information cases expanded to cells. Ranges in the
/// table ("1 ~ 3", "0.05 ~ 0.45") are swept (σ_a ∈ {1, 2, 3}; σ_v in steps of
/// 0.1); blank cells hold the row's previous value. Two reference cells come
/// first: zero noise without the mask (must reproduce the deterministic
/// game) and zero noise with the mask.
pub fn imperfect_info_cases() -> Vec<NoiseCase> {
    let cell = |case: &str, y: f64, v: f64, a: f64, mask: bool| NoiseCase {
        case: case.into(),
        noise: NoiseSpec { sigma_y: y, sigma_v: v, sigma_a: a },
        mask,
    };
    let mut cases = vec![cell("reference", 0.0, 0.0, 0.0, false), cell("mask_only", 0.0, 0.0, 0.0, true)];
    for (i, v) in [0.05, 0.1, 0.2].into_iter().enumerate() {
        for a in [1.0, 2.0, 3.0] {
            cases.push(cell(&format!("case{}", i + 1), 0.0, v, a, true));
        }
    }
    for (i, y) in [0.01, 0.02, 0.05].into_iter().enumerate() {
        for v in [0.05, 0.15, 0.25, 0.35, 0.45] {
            cases.push(cell(&format!("case{}", i + 4), y, v, 1.0, true));
        }
    }
    cases
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessCell {
    pub team: String,
    pub case: NoiseCase,
    pub report: WinRateReport,
    #[serde(skip)]
    pub outcomes: Vec<EpisodeOutcome>,
}

/// Evaluates every team in every noise case on the same seeds.
pub fn robustness_grid(
    teams: &[TeamPolicy],
    adversary: &Adversary,
    base: &EnvConfig,
    cases: &[NoiseCase],
    n: usize,
    seed_base: u64,
    par: Par,
) -> Result<Vec<RobustnessCell>, SimError> {
    let mut cells = Vec::new();
    for team in teams {
        for case in cases {
            let spec = PolicySpec { team: team.clone(), adversary: adversary.clone(), observation: case.model() };
            let (report, outcomes) = win_rate(&spec, base, n, seed_base, par)?;
            cells.push(RobustnessCell { team: team.label().into(), case: case.clone(), report, outcomes });
        }
    }
    Ok(cells)
}

pub fn write_robustness_csv(path: &Path, cells: &[RobustnessCell]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["team", "case", "sigma_y", "sigma_v", "sigma_a", "mask", "n", "wins", "rate", "ci_lo", "ci_hi"])?;
    for c in cells {
        let r = &c.report;
        let s = c.case.noise;
        w.write_record([
            c.team.clone(),
            c.case.case.clone(),
            s.sigma_y.to_string(),
            s.sigma_v.to_string(),
            s.sigma_a.to_string(),
            c.case.mask.to_string(),
            r.n.to_string(),
            r.wins.to_string(),
            r.rate.to_string(),
            r.ci95[0].to_string(),
            r.ci95[1].to_string(),
        ])?;
    }
    w.flush()
}
