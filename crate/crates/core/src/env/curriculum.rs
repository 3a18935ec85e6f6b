use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::STANDARD_G;
use crate::guidance::AnalyticPolicy;

/// Adversary the interceptor flies in one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurriculumStage {
    pub stage: u8,
    pub interceptor_policy: AnalyticPolicy,
    pub interceptor_max_accel: f64,
}

/// Easy-to-hard adversary schedule over training episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curriculum {
    pub enabled: bool,
    /// Last episode index (inclusive) of stage 1.
    pub stage1_last: u64,
    /// Last episode index (inclusive) of stage 2.
    pub stage2_last: u64,
    pub stage2_policy: AnalyticPolicy,
    pub stage2_max_accel: f64,
    pub stage3_policy: AnalyticPolicy,
    /// Stage-3 interceptor capability, drawn uniformly per episode.
    pub stage3_max_accels: Vec<f64>,
}

impl Curriculum {
    pub fn standard(eta: f64) -> Self {
        Self {
            enabled: true,
            stage1_last: 100,
            stage2_last: 1000,
            stage2_policy: AnalyticPolicy::SquareWave { amplitude: 6.0 * STANDARD_G, period: 4.0 },
            stage2_max_accel: 6.0 * STANDARD_G,
            stage3_policy: AnalyticPolicy::Sogl { eta },
            stage3_max_accels: vec![2.0 * STANDARD_G, 4.0 * STANDARD_G, 6.0 * STANDARD_G],
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.stage1_last >= self.stage2_last {
            return Err("curriculum stage boundaries must increase".into());
        }
        if self.stage3_max_accels.is_empty() || self.stage3_max_accels.iter().any(|a| !(*a >= 0.0)) {
            return Err("stage3_max_accels must be a non-empty list of values >= 0".into());
        }
        if !(self.stage2_max_accel >= 0.0) {
            return Err("stage2_max_accel must be >= 0".into());
        }
        self.stage2_policy.validate()?;
        self.stage3_policy.validate()
    }

    /// Stage number for an episode; always 3 when the schedule is disabled.
    pub fn stage_index(&self, episode: u64) -> u8 {
        if !self.enabled {
            3
        } else if episode <= self.stage1_last {
            1
        } else if episode <= self.stage2_last {
            2
        } else {
            3
        }
    }

    /// Adversary for `episode`; stage 3 consumes one draw from `rng`.
    pub fn stage<R: Rng + ?Sized>(&self, episode: u64, rng: &mut R) -> CurriculumStage {
        match self.stage_index(episode) {
            1 => CurriculumStage {
                stage: 1,
                interceptor_policy: AnalyticPolicy::NonManeuvering,
                interceptor_max_accel: 0.0,
            },
            2 => CurriculumStage {
                stage: 2,
                interceptor_policy: self.stage2_policy.clone(),
                interceptor_max_accel: self.stage2_max_accel,
            },
            _ => {
                let pick = rng.random_range(0..self.stage3_max_accels.len());
                CurriculumStage {
                    stage: 3,
                    interceptor_policy: self.stage3_policy.clone(),
                    interceptor_max_accel: self.stage3_max_accels[pick],
                }
            }
        }
    }
}

/// Stage of the standard schedule.
pub fn curriculum_stage<R: Rng + ?Sized>(episode: u64, eta: f64, rng: &mut R) -> CurriculumStage {
    Curriculum::standard(eta).stage(episode, rng)
}
