//! Twin-delayed deterministic policy gradient for the target/defender team.

mod agent;
mod buffer;
mod trainer;

pub use agent::{exploration_action, policy_action, Agent, UpdateStats};
pub use buffer::{ReplayBuffer, Transition};
pub use trainer::{train, CurvePoint, TrainReport, TrainSpec};

use serde::{Deserialize, Serialize};

pub const ACTION_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Td3Config {
    pub gamma: f64,
    pub lr: f64,
    pub capacity: usize,
    pub batch: usize,
    /// Soft-update rate of the target networks.
    pub kappa: f64,
    pub policy_delay: u64,
    /// Environment steps collected between training phases.
    pub train_frequency: u64,
    pub smoothing_sigma: f64,
    pub smoothing_clip: f64,
    pub exploration_sigma: f64,
    pub warmup_steps: u64,
    /// Abort when a loss exceeds this magnitude.
    pub divergence_limit: f64,
    /// Hidden layer widths shared by actor and critics.
    pub hidden: Vec<usize>,
}

impl Default for Td3Config {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lr: 3e-4,
            capacity: 5120,
            batch: 128,
            kappa: 5e-3,
            policy_delay: 2,
            train_frequency: 6000,
            smoothing_sigma: 0.2,
            smoothing_clip: 0.5,
            exploration_sigma: 0.1,
            warmup_steps: 1000,
            divergence_limit: 1e6,
            hidden: crate::nn::FULL_HIDDEN.to_vec(),
        }
    }
}

impl Td3Config {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err("td3 gamma must lie in (0, 1]".into());
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err("td3 kappa must lie in (0, 1]".into());
        }
        if self.policy_delay < 1 {
            return Err("policy_delay must be >= 1".into());
        }
        if self.capacity == 0 || self.batch == 0 || self.train_frequency == 0 {
            return Err("capacity, batch and train_frequency must be >= 1".into());
        }
        let nonneg = [self.lr, self.smoothing_sigma, self.smoothing_clip, self.exploration_sigma];
        if nonneg.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err("lr and noise scales must be finite and >= 0".into());
        }
        if !(self.divergence_limit > 0.0) {
            return Err("divergence_limit must be > 0".into());
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err("hidden widths must be a non-empty list of positive sizes".into());
        }
        Ok(())
    }
}
