//! Zero-effort miss of both collision triangles under first-order lag
//! dynamics, and its rate under given commands.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Commands, LinearState, PerPlayer, SimClock, A_D, A_I, A_T, YDOT_ID, YDOT_IT, Y_ID, Y_IT};
use crate::error::SimError;

/// `φ(χ) = e^{−χ} + χ − 1`, evaluated without cancellation near zero.
pub fn phi(chi: f64) -> f64 {
    if chi.abs() < 1e-3 {
        let c2 = chi * chi;
        c2 * (0.5 - chi / 6.0 + c2 / 24.0 - chi * c2 / 120.0)
    } else {
        (-chi).exp_m1() + chi
    }
}

/// ZEMs of both triangles together with the time-to-go they were evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ZemPair {
    pub z_it: f64,
    pub z_id: f64,
    pub t_go_it: f64,
    pub t_go_id: f64,
}

/// Lag-weighted horizon `τ²φ(t_go/τ)`: the terminal displacement caused by a
/// unit achieved acceleration decaying from now.
fn lag_horizon(t_go: f64, tau: f64) -> f64 {
    tau * tau * phi(t_go / tau)
}

/// Terminal lateral separation of one triangle if all commands were zero.
pub fn zem_single(x: &LinearState, t_go: f64, taus: &PerPlayer<f64>, defender_triangle: bool) -> f64 {
    let s = &x.0;
    let (y, ydot, opp, tau_opp) = if defender_triangle {
        (s[Y_ID], s[YDOT_ID], s[A_D], taus.defender)
    } else {
        (s[Y_IT], s[YDOT_IT], s[A_T], taus.target)
    };
    y + t_go * ydot + lag_horizon(t_go, taus.interceptor) * s[A_I] - lag_horizon(t_go, tau_opp) * opp
}

/// ZEM pair at the clock's time. Errors if the clock is past `t_IT`; past
/// `t_ID` the defender time-to-go is clamped to zero (callers that need the
/// frozen terminal value keep it themselves).
pub fn zem(x: &LinearState, clock: &SimClock, taus: &PerPlayer<f64>) -> Result<ZemPair, SimError> {
    if clock.t > clock.t_it * (1.0 + 1e-12) + 1e-12 {
        return Err(SimError::StaleClock { t: clock.t, t_final: clock.t_it });
    }
    let t_go_it = clock.t_go_it();
    let t_go_id = clock.t_go_id();
    Ok(ZemPair {
        z_it: zem_single(x, t_go_it, taus, false),
        z_id: zem_single(x, t_go_id, taus, true),
        t_go_it,
        t_go_id,
    })
}

/// `(Ż_IT, Ż_ID)` under commands `u`.
pub fn zem_rate(clock: &SimClock, taus: &PerPlayer<f64>, u: &Commands) -> (f64, f64) {
    let (g_it, g_id) = (clock.t_go_it(), clock.t_go_id());
    let gain = |t_go: f64, tau: f64| tau * phi(t_go / tau);
    let rate_it = gain(g_it, taus.interceptor) * u.interceptor - gain(g_it, taus.target) * u.target;
    let rate_id = gain(g_id, taus.interceptor) * u.interceptor - gain(g_id, taus.defender) * u.defender;
    (rate_it, rate_id)
}
