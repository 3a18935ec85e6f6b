//! Scripted guidance laws: the bang-bang optimal laws for the interceptor
//! and for the target/defender pair, the linear-quadratic interceptor law,
//! and the open-loop adversaries used by the curriculum.

use serde::{Deserialize, Serialize};

use crate::dynamics::PerPlayer;
use crate::error::SimError;
use crate::zem::{phi, ZemPair};

/// Sign with the tie-break `sgn(0) = +1`.
pub fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `sgn φ(t_go/τ)`: +1 while time remains, 0 at the terminal instant.
fn horizon_sign(t_go: f64) -> f64 {
    if t_go > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Bang-bang interceptor law: evade the defender while |Z_ID| < η, otherwise
/// pursue the target.
pub fn sogl_interceptor(zem: &ZemPair, u_max: f64, eta: f64) -> f64 {
    if zem.t_go_id > 0.0 && zem.z_id.abs() < eta {
        u_max * sgn(zem.z_id) * horizon_sign(zem.t_go_id)
    } else {
        -u_max * sgn(zem.z_it) * horizon_sign(zem.t_go_it)
    }
}

/// Bang-bang laws of the protected pair: the target opens Z_IT, the defender
/// closes Z_ID. Returns `(u_T, u_D)`.
pub fn sogl_target_defender(zem: &ZemPair, max_accel: &PerPlayer<f64>) -> (f64, f64) {
    let u_t = -max_accel.target * sgn(zem.z_it) * horizon_sign(zem.t_go_it);
    let u_d = max_accel.defender * sgn(zem.z_id) * horizon_sign(zem.t_go_id);
    (u_t, u_d)
}

/// Square wave starting at `+amplitude`.
pub fn square_wave(t: f64, amplitude: f64, period: f64) -> f64 {
    if t.rem_euclid(period) < period / 2.0 {
        amplitude
    } else {
        -amplitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqoglWeights {
    pub omega1: f64,
    pub omega2: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl Default for LqoglWeights {
    fn default() -> Self {
        Self { omega1: 1.0, omega2: 25.0, xi1: 1.0, xi2: 25.0 }
    }
}

/// How the horizon integral `I` becomes a gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainForm {
    /// `1 / (I − 1)`
    #[default]
    ShiftedReciprocal,
    /// `1/I − 1`
    ReciprocalMinusOne,
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// One side of the linear-quadratic duel: a player's bound, lag and weight.
#[derive(Debug, Clone, Copy)]
pub struct Duelist {
    pub max_accel: f64,
    pub tau: f64,
    pub weight: f64,
}

/// `∫_0^{t_go} [(1/w₁)(u₁τ₁φ(s/τ₁))² − (1/w₂)(u₂τ₂φ(s/τ₂))²] ds`, integrated
/// over the remaining horizon.
pub fn horizon_integral(t_go: f64, own: Duelist, opponent: Duelist) -> f64 {
    let integrand = |s: f64| {
        let mine = own.max_accel * own.tau * phi(s / own.tau);
        let theirs = opponent.max_accel * opponent.tau * phi(s / opponent.tau);
        mine * mine / own.weight - theirs * theirs / opponent.weight
    };
    adaptive_simpson(&integrand, 0.0, t_go, 1e-9)
}

pub fn gain_from_integral(integral: f64, form: GainForm) -> Result<f64, SimError> {
    if !(integral > 0.0) {
        return Err(SimError::GainSingularity { integral });
    }
    match form {
        GainForm::ReciprocalMinusOne => Ok(1.0 / integral - 1.0),
        GainForm::ShiftedReciprocal => {
            let shifted = integral - 1.0;
            if shifted.abs() < 1e-12 {
                return Err(SimError::GainSingularity { integral });
            }
            Ok(1.0 / shifted)
        }
    }
}

/// Interceptor bound/lag plus both opponents' bounds/lags.
#[derive(Debug, Clone, Copy)]
pub struct Maneuverability {
    pub max_accel: PerPlayer<f64>,
    pub tau: PerPlayer<f64>,
}

/// `(K, P)`: the evasion gain against the defender and the pursuit gain
/// against the target.
pub fn lqogl_gains(
    zem: &ZemPair,
    m: &Maneuverability,
    weights: &LqoglWeights,
    form: GainForm,
) -> Result<(f64, f64), SimError> {
    Ok((evasion_gain(zem, m, weights, form)?, pursuit_gain(zem, m, weights, form)?))
}

fn evasion_gain(zem: &ZemPair, m: &Maneuverability, w: &LqoglWeights, form: GainForm) -> Result<f64, SimError> {
    let own = Duelist { max_accel: m.max_accel.interceptor, tau: m.tau.interceptor, weight: w.omega1 };
    let opp = Duelist { max_accel: m.max_accel.defender, tau: m.tau.defender, weight: w.omega2 };
    gain_from_integral(horizon_integral(zem.t_go_id, own, opp), form)
}

fn pursuit_gain(zem: &ZemPair, m: &Maneuverability, w: &LqoglWeights, form: GainForm) -> Result<f64, SimError> {
    let own = Duelist { max_accel: m.max_accel.interceptor, tau: m.tau.interceptor, weight: w.xi1 };
    let opp = Duelist { max_accel: m.max_accel.target, tau: m.tau.target, weight: w.xi2 };
    gain_from_integral(horizon_integral(zem.t_go_it, own, opp), form)
}

/// Linear-quadratic interceptor law, clamped to the interceptor bound.
pub fn lqogl_interceptor(
    zem: &ZemPair,
    m: &Maneuverability,
    weights: &LqoglWeights,
    eta: f64,
    form: GainForm,
) -> Result<f64, SimError> {
    let u_max = m.max_accel.interceptor;
    let tau = m.tau.interceptor;
    let raw = if zem.t_go_id > 0.0 && zem.z_id.abs() < eta {
        let k = evasion_gain(zem, m, weights, form)?;
        -(k * zem.z_id / weights.omega1) * u_max * tau * phi(zem.t_go_id / tau)
    } else if zem.t_go_it > 0.0 {
        let p = pursuit_gain(zem, m, weights, form)?;
        -(p * zem.z_it / weights.xi1) * u_max * tau * phi(zem.t_go_it / tau)
    } else {
        0.0
    };
    Ok(raw.clamp(-u_max, u_max))
}

/// Interceptor policy selected by name in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum AnalyticPolicy {
    #[serde(rename = "none")]
    NonManeuvering,
    #[serde(rename = "square")]
    SquareWave { amplitude: f64, period: f64 },
    #[serde(rename = "sogl")]
    Sogl { eta: f64 },
    #[serde(rename = "lqogl")]
    Lqogl {
        #[serde(default)]
        weights: LqoglWeights,
        eta: f64,
        #[serde(default)]
        gain_form: GainForm,
    },
}

impl AnalyticPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            AnalyticPolicy::NonManeuvering => "none",
            AnalyticPolicy::SquareWave { .. } => "square",
            AnalyticPolicy::Sogl { .. } => "sogl",
            AnalyticPolicy::Lqogl { .. } => "lqogl",
        }
    }

    /// Policy `name` with default parameters (`eta` is the switching radius).
    pub fn by_name(name: &str, eta: f64, g: f64) -> Option<Self> {
        match name {
            "none" => Some(AnalyticPolicy::NonManeuvering),
            "square" => Some(AnalyticPolicy::SquareWave { amplitude: 6.0 * g, period: 4.0 }),
            "sogl" => Some(AnalyticPolicy::Sogl { eta }),
            "lqogl" => Some(AnalyticPolicy::Lqogl {
                weights: LqoglWeights::default(),
                eta,
                gain_form: GainForm::default(),
            }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            AnalyticPolicy::NonManeuvering => Ok(()),
            AnalyticPolicy::SquareWave { amplitude, period } => {
                if !(*period > 0.0) || !(*amplitude >= 0.0) {
                    Err("square wave needs period > 0 and amplitude >= 0".into())
                } else {
                    Ok(())
                }
            }
            AnalyticPolicy::Sogl { eta } => {
                if *eta > 0.0 {
                    Ok(())
                } else {
                    Err("sogl eta must be > 0".into())
                }
            }
            AnalyticPolicy::Lqogl { weights, eta, .. } => {
                let w = [weights.omega1, weights.omega2, weights.xi1, weights.xi2];
                if !(*eta > 0.0) {
                    Err("lqogl eta must be > 0".into())
                } else if w.iter().any(|v| !(*v > 0.0)) {
                    Err("lqogl weights must be positive".into())
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Interceptor command at time `t` (m/s²), within ±`m.max_accel.interceptor`.
    pub fn command(&self, t: f64, zem: &ZemPair, m: &Maneuverability) -> Result<f64, SimError> {
        let u_max = m.max_accel.interceptor;
        let u = match self {
            AnalyticPolicy::NonManeuvering => 0.0,
            AnalyticPolicy::SquareWave { amplitude, period } => square_wave(t, *amplitude, *period),
            AnalyticPolicy::Sogl { eta } => sogl_interceptor(zem, u_max, *eta),
            AnalyticPolicy::Lqogl { weights, eta, gain_form } => lqogl_interceptor(zem, m, weights, *eta, *gain_form)?,
        };
        Ok(u.clamp(-u_max, u_max))
    }
}
