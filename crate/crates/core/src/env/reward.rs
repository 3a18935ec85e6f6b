use serde::{Deserialize, Serialize};

use crate::zem::ZemPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardShaping {
    /// Terminal reward only.
    Sparse,
    /// ZEM-based intermediate reward plus terminal reward.
    #[default]
    Shaped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub sigma_terminal: f64,
    /// Bound on the magnitude of the intermediate reward the terminal reward must dominate.
    pub c: f64,
    /// Foresight horizon in decision steps.
    pub n: u32,
    pub gamma: f64,
    #[serde(default)]
    pub shaping: RewardShaping,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            alpha1: 500.0,
            alpha2: 500.0,
            beta1: 1.0,
            beta2: 1.0,
            sigma_terminal: 7.5,
            c: 1.0,
            n: 200,
            gamma: 0.99,
            shaping: RewardShaping::Shaped,
        }
    }
}

impl RewardParams {
    /// Smallest admissible terminal reward, `c / γⁿ`.
    pub fn terminal_bound(&self) -> f64 {
        self.c / self.gamma.powi(self.n as i32)
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [self.alpha1, self.alpha2, self.beta1, self.beta2, self.sigma_terminal, self.c];
        if !positive.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err("reward alpha, beta, sigma_terminal and c must be > 0".into());
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(format!("reward gamma {} outside (0, 1]", self.gamma));
        }
        let bound = self.terminal_bound();
        if self.sigma_terminal < bound {
            return Err(format!(
                "sigma_terminal {} below c/gamma^n = {bound}",
                self.sigma_terminal
            ));
        }
        Ok(())
    }
}

/// `|Z_IT/α₁|^β₁ − |Z_ID/α₂|^β₂`.
pub fn medium_reward(zem: &ZemPair, rp: &RewardParams) -> f64 {
    (zem.z_it / rp.alpha1).abs().powf(rp.beta1) - (zem.z_id / rp.alpha2).abs().powf(rp.beta2)
}

pub fn terminal_reward(success: bool, rp: &RewardParams) -> f64 {
    if success {
        rp.sigma_terminal
    } else {
        -rp.sigma_terminal
    }
}

/// Reward for one decision step: the intermediate term (shaped mode only)
/// plus the terminal term when the step ends the episode.
pub fn step_reward(zem: &ZemPair, terminal: Option<bool>, rp: &RewardParams) -> f64 {
    let medium = match rp.shaping {
        RewardShaping::Shaped => medium_reward(zem, rp),
        RewardShaping::Sparse => 0.0,
    };
    medium + terminal.map_or(0.0, |s| terminal_reward(s, rp))
}
