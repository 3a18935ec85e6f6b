//! The 13-slot agent observation, its imperfect-information model and the
//! normalized copy fed to networks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{LinearState, A_D, A_I, A_T, YDOT_ID, YDOT_IT, Y_ID, Y_IT};
use crate::zem::ZemPair;

pub const OBS_DIM: usize = 13;

pub const O_Y_IT: usize = 0;
pub const O_YDOT_IT: usize = 1;
pub const O_Y_ID: usize = 2;
pub const O_YDOT_ID: usize = 3;
pub const O_A_I: usize = 4;
pub const O_A_T: usize = 5;
pub const O_A_D: usize = 6;
pub const O_TGO_IT: usize = 7;
pub const O_TGO_ID: usize = 8;
pub const O_Z_IT: usize = 9;
pub const O_Z_ID: usize = 10;
pub const O_AMAX_I: usize = 11;
pub const O_TAU_I: usize = 12;

/// Slots perturbed by the lateral-distance noise amplitude.
pub const DISTANCE_SLOTS: [usize; 4] = [O_Y_IT, O_Y_ID, O_Z_IT, O_Z_ID];
/// Slots perturbed by the lateral-rate noise amplitude.
pub const RATE_SLOTS: [usize; 2] = [O_YDOT_IT, O_YDOT_ID];
/// Slots perturbed by the acceleration noise amplitude.
pub const ACCEL_SLOTS: [usize; 3] = [O_A_I, O_A_T, O_A_D];
/// Prior knowledge of the interceptor, removed by the mask.
pub const PRIOR_SLOTS: [usize; 2] = [O_AMAX_I, O_TAU_I];

/// `[y_IT, ẏ_IT, y_ID, ẏ_ID, a_I, a_T, a_D, t_goIT, t_goID, Z_IT, Z_ID, a_I^max, τ_I]`, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn perfect(x: &LinearState, zem: &ZemPair, interceptor_max_accel: f64, interceptor_tau: f64) -> Self {
        let s = &x.0;
        Observation([
            s[Y_IT],
            s[YDOT_IT],
            s[Y_ID],
            s[YDOT_ID],
            s[A_I],
            s[A_T],
            s[A_D],
            zem.t_go_it,
            zem.t_go_id,
            zem.z_it,
            zem.z_id,
            interceptor_max_accel,
            interceptor_tau,
        ])
    }

    /// ZEM pair as seen through this observation.
    pub fn zem(&self) -> ZemPair {
        ZemPair {
            z_it: self.0[O_Z_IT],
            z_id: self.0[O_Z_ID],
            t_go_it: self.0[O_TGO_IT],
            t_go_id: self.0[O_TGO_ID],
        }
    }

    /// Network input. Distances and rates are log-compressed so that the
    /// sub-metre regime deciding an intercept stays resolvable next to
    /// kilometre-scale separations; every slot is clipped to ±[`NORM_CLIP`].
    pub fn normalized(&self) -> [f64; OBS_DIM] {
        let o = &self.0;
        let mut out = [0.0; OBS_DIM];
        for slot in DISTANCE_SLOTS {
            out[slot] = signed_log(o[slot], DISTANCE_UNIT, DISTANCE_SPAN);
        }
        for slot in RATE_SLOTS {
            out[slot] = signed_log(o[slot], RATE_UNIT, RATE_SPAN);
        }
        for slot in ACCEL_SLOTS {
            out[slot] = o[slot] / ACCEL_SCALE;
        }
        out[O_TGO_IT] = o[O_TGO_IT] / TIME_SCALE;
        out[O_TGO_ID] = o[O_TGO_ID] / TIME_SCALE;
        out[O_AMAX_I] = o[O_AMAX_I] / ACCEL_SCALE;
        out[O_TAU_I] = o[O_TAU_I] / TAU_SCALE;
        for v in out.iter_mut() {
            *v = v.clamp(-NORM_CLIP, NORM_CLIP);
        }
        out
    }
}

pub const DISTANCE_UNIT: f64 = 0.1;
pub const DISTANCE_SPAN: f64 = 1e4;
pub const RATE_UNIT: f64 = 0.1;
pub const RATE_SPAN: f64 = 1e3;
pub const ACCEL_SCALE: f64 = 60.0;
pub const TIME_SCALE: f64 = 20.0;
pub const TAU_SCALE: f64 = 0.1;
pub const NORM_CLIP: f64 = 3.0;

/// `sgn(v)·ln(1 + |v|/unit) / ln(1 + span/unit)`.
fn signed_log(v: f64, unit: f64, span: f64) -> f64 {
    v.signum() * (v.abs() / unit).ln_1p() / (span / unit).ln_1p()
}

/// Multiplicative noise amplitudes for the distance, rate and acceleration blocks.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub sigma_y: f64,
    pub sigma_v: f64,
    pub sigma_a: f64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<(), String> {
        if [self.sigma_y, self.sigma_v, self.sigma_a].iter().all(|s| *s >= 0.0) {
            Ok(())
        } else {
            Err("noise amplitudes must be >= 0".into())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    #[default]
    Perfect,
    Imperfect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationModel {
    pub mode: ObservationMode,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Zero the prior-knowledge slots in imperfect mode.
    #[serde(default = "default_true")]
    pub mask_prior: bool,
}

fn default_true() -> bool {
    true
}

impl Default for ObservationModel {
    fn default() -> Self {
        Self { mode: ObservationMode::Perfect, noise: NoiseSpec::default(), mask_prior: true }
    }
}

impl ObservationModel {
    pub fn imperfect(noise: NoiseSpec) -> Self {
        Self { mode: ObservationMode::Imperfect, noise, mask_prior: true }
    }
}

/// Applies the observation model: perfect mode passes the vector through;
/// imperfect mode scales each kinematic slot by `1 + δ`, `δ ~ U(−σ, σ)` with
/// its block's amplitude, and masks the prior-knowledge slots.
pub fn observe<R: Rng + ?Sized>(perfect: &Observation, model: &ObservationModel, rng: &mut R) -> Observation {
    if model.mode == ObservationMode::Perfect {
        return *perfect;
    }
    let mut o = *perfect;
    let blocks: [(&[usize], f64); 3] = [
        (&DISTANCE_SLOTS, model.noise.sigma_y),
        (&RATE_SLOTS, model.noise.sigma_v),
        (&ACCEL_SLOTS, model.noise.sigma_a),
    ];
    for (slots, sigma) in blocks {
        for &slot in slots {
            let unit: f64 = rng.random();
            let delta = sigma * (2.0 * unit - 1.0);
            o.0[slot] *= 1.0 + delta;
        }
    }
    if model.mask_prior {
        for slot in PRIOR_SLOTS {
            o.0[slot] = 0.0;
        }
    }
    o
}
