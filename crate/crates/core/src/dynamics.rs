//! Engagement kinematics: player parameters, the linearized seven-state
//! relative model with first-order actuator lag, the planar nonlinear
//! model it approximates, and the fixed interception times.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::zem::phi;

/// Multiples of `g` are resolved with this value (6g = 60 m/s²).
pub const STANDARD_G: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayerKind {
    Interceptor,
    Target,
    Defender,
}

impl PlayerKind {
    pub const ALL: [PlayerKind; 3] = [PlayerKind::Interceptor, PlayerKind::Target, PlayerKind::Defender];

    pub fn index(self) -> usize {
        match self {
            PlayerKind::Interceptor => 0,
            PlayerKind::Target => 1,
            PlayerKind::Defender => 2,
        }
    }
}

/// One value per player, indexable by [`PlayerKind`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerPlayer<T> {
    pub interceptor: T,
    pub target: T,
    pub defender: T,
}

impl<T> PerPlayer<T> {
    pub fn new(interceptor: T, target: T, defender: T) -> Self {
        Self { interceptor, target, defender }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerPlayer<U> {
        PerPlayer {
            interceptor: f(&self.interceptor),
            target: f(&self.target),
            defender: f(&self.defender),
        }
    }
}

impl<T> Index<PlayerKind> for PerPlayer<T> {
    type Output = T;
    fn index(&self, kind: PlayerKind) -> &T {
        match kind {
            PlayerKind::Interceptor => &self.interceptor,
            PlayerKind::Target => &self.target,
            PlayerKind::Defender => &self.defender,
        }
    }
}

impl<T> IndexMut<PlayerKind> for PerPlayer<T> {
    fn index_mut(&mut self, kind: PlayerKind) -> &mut T {
        match kind {
            PlayerKind::Interceptor => &mut self.interceptor,
            PlayerKind::Target => &mut self.target,
            PlayerKind::Defender => &mut self.defender,
        }
    }
}

/// Guidance commands (m/s²) for the three players.
pub type Commands = PerPlayer<f64>;

/// Clamps every command to its player's acceleration bound.
pub fn clamp_commands(u: &Commands, max_accel: &PerPlayer<f64>) -> Commands {
    PerPlayer {
        interceptor: u.interceptor.clamp(-max_accel.interceptor, max_accel.interceptor),
        target: u.target.clamp(-max_accel.target, max_accel.target),
        defender: u.defender.clamp(-max_accel.defender, max_accel.defender),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerParams {
    /// Command bound, m/s².
    pub max_accel: f64,
    /// Actuator lag time constant, s.
    pub time_constant: f64,
    /// Lethal radius, m.
    pub kill_radius: f64,
    /// Initial position along the reference line, m.
    pub init_horizontal: f64,
    /// Initial altitude, m.
    pub init_vertical: f64,
    /// Constant speed, m/s.
    pub init_speed: f64,
}

impl PlayerParams {
    fn validate(&self, name: &str) -> Result<(), String> {
        if !(self.max_accel >= 0.0) {
            return Err(format!("{name}.max_accel must be >= 0"));
        }
        if !(self.time_constant > 0.0) {
            return Err(format!("{name}.time_constant must be > 0"));
        }
        if !(self.kill_radius >= 0.0) {
            return Err(format!("{name}.kill_radius must be >= 0"));
        }
        if !(self.init_speed > 0.0) {
            return Err(format!("{name}.init_speed must be > 0"));
        }
        Ok(())
    }
}

/// Physical setup of one engagement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngagementConfig {
    pub interceptor: PlayerParams,
    pub target: PlayerParams,
    pub defender: PlayerParams,
    /// Interceptor switches from pursuit to evasion when |Z_ID| drops below this, m.
    pub switching_radius: f64,
    pub physics_dt: f64,
    pub decision_dt: f64,
    /// Interceptor initial altitude is drawn uniformly from this range, m.
    pub interceptor_altitude_range: [f64; 2],
    pub gravity_g: f64,
}

impl EngagementConfig {
    pub fn table3() -> Self {
        Self {
            interceptor: PlayerParams {
                max_accel: 6.0 * STANDARD_G,
                time_constant: 0.05,
                kill_radius: 0.25,
                init_horizontal: 300e3,
                init_vertical: 500e3,
                init_speed: 7.6e3,
            },
            target: PlayerParams {
                max_accel: 1.0 * STANDARD_G,
                time_constant: 0.1,
                kill_radius: 0.5,
                init_horizontal: 0.0,
                init_vertical: 500e3,
                init_speed: 7.6e3,
            },
            defender: PlayerParams {
                max_accel: 2.0 * STANDARD_G,
                time_constant: 0.02,
                kill_radius: 0.25,
                init_horizontal: 120e3,
                init_vertical: 500.1e3,
                init_speed: 7.6e3,
            },
            switching_radius: 0.25,
            physics_dt: 1e-3,
            decision_dt: 0.1,
            interceptor_altitude_range: [499.8e3, 500.2e3],
            gravity_g: STANDARD_G,
        }
    }

    pub fn player(&self, kind: PlayerKind) -> &PlayerParams {
        match kind {
            PlayerKind::Interceptor => &self.interceptor,
            PlayerKind::Target => &self.target,
            PlayerKind::Defender => &self.defender,
        }
    }

    pub fn player_mut(&mut self, kind: PlayerKind) -> &mut PlayerParams {
        match kind {
            PlayerKind::Interceptor => &mut self.interceptor,
            PlayerKind::Target => &mut self.target,
            PlayerKind::Defender => &mut self.defender,
        }
    }

    pub fn time_constants(&self) -> PerPlayer<f64> {
        PerPlayer::new(
            self.interceptor.time_constant,
            self.target.time_constant,
            self.defender.time_constant,
        )
    }

    pub fn max_accels(&self) -> PerPlayer<f64> {
        PerPlayer::new(self.interceptor.max_accel, self.target.max_accel, self.defender.max_accel)
    }

    /// Interceptor–defender lethal radius (the defender's kill radius).
    pub fn lethal_radius_id(&self) -> f64 {
        self.defender.kill_radius
    }

    /// Interceptor–target lethal radius (the target's kill radius).
    pub fn lethal_radius_it(&self) -> f64 {
        self.target.kill_radius
    }

    /// Physics sub-steps per agent decision.
    pub fn substeps(&self) -> usize {
        (self.decision_dt / self.physics_dt).round() as usize
    }

    /// Nominal lateral offset of the defender above the target, m.
    pub fn defender_offset(&self) -> f64 {
        self.defender.init_vertical - self.target.init_vertical
    }

    pub fn validate(&self) -> Result<(), String> {
        self.interceptor.validate("interceptor")?;
        self.target.validate("target")?;
        self.defender.validate("defender")?;
        if !(self.switching_radius > 0.0) {
            return Err("switching_radius must be > 0".into());
        }
        if !(self.physics_dt > 0.0 && self.physics_dt <= self.decision_dt) {
            return Err("need 0 < physics_dt <= decision_dt".into());
        }
        let ratio = self.decision_dt / self.physics_dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err("decision_dt must be an integer multiple of physics_dt".into());
        }
        let [lo, hi] = self.interceptor_altitude_range;
        if !(lo <= hi) {
            return Err("interceptor_altitude_range lower bound exceeds upper".into());
        }
        if !(self.gravity_g > 0.0) {
            return Err("gravity_g must be > 0".into());
        }
        interception_times(self).map_err(|e| e.to_string())?;
        Ok(())
    }
}

/// Fixed interception instants of the two collision triangles, (t_IT, t_ID) in s.
pub fn interception_times(config: &EngagementConfig) -> Result<(f64, f64), SimError> {
    let closing_it = config.interceptor.init_speed + config.target.init_speed;
    let closing_id = config.interceptor.init_speed + config.defender.init_speed;
    for closing in [closing_it, closing_id] {
        if !(closing > 0.0) {
            return Err(SimError::NonPositiveClosingSpeed(closing));
        }
    }
    let rho_it = (config.interceptor.init_horizontal - config.target.init_horizontal).abs();
    let rho_id = (config.interceptor.init_horizontal - config.defender.init_horizontal).abs();
    Ok((rho_it / closing_it, rho_id / closing_id))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeToGo {
    pub remaining: f64,
    /// Set when `t` was past the final time and the result was clamped.
    pub expired: bool,
}

pub fn time_to_go(t: f64, t_final: f64) -> TimeToGo {
    if t > t_final {
        TimeToGo { remaining: 0.0, expired: true }
    } else {
        TimeToGo { remaining: t_final - t, expired: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimClock {
    pub t: f64,
    pub t_it: f64,
    pub t_id: f64,
}

impl SimClock {
    pub fn start(config: &EngagementConfig) -> Result<Self, SimError> {
        let (t_it, t_id) = interception_times(config)?;
        Ok(Self { t: 0.0, t_it, t_id })
    }

    pub fn at(&self, t: f64) -> Self {
        Self { t, ..*self }
    }

    pub fn t_go_it(&self) -> f64 {
        time_to_go(self.t, self.t_it).remaining
    }

    pub fn t_go_id(&self) -> f64 {
        time_to_go(self.t, self.t_id).remaining
    }
}

/// Exact response of `ȧ = (u − a)/τ` over `dt` with `u` held constant.
pub fn first_order_lag(a: f64, u: f64, tau: f64, dt: f64) -> f64 {
    u + (a - u) * (-dt / tau).exp()
}

pub const Y_IT: usize = 0;
pub const YDOT_IT: usize = 1;
pub const Y_ID: usize = 2;
pub const YDOT_ID: usize = 3;
pub const A_I: usize = 4;
pub const A_T: usize = 5;
pub const A_D: usize = 6;

/// Relative state `[y_IT, ẏ_IT, y_ID, ẏ_ID, a_I, a_T, a_D]` in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearState(pub [f64; 7]);

impl LinearState {
    pub const DIM: usize = 7;

    pub fn y_it(&self) -> f64 {
        self.0[Y_IT]
    }
    pub fn ydot_it(&self) -> f64 {
        self.0[YDOT_IT]
    }
    pub fn y_id(&self) -> f64 {
        self.0[Y_ID]
    }
    pub fn ydot_id(&self) -> f64 {
        self.0[YDOT_ID]
    }

    pub fn accels(&self) -> PerPlayer<f64> {
        PerPlayer::new(self.0[A_I], self.0[A_T], self.0[A_D])
    }

    /// `ẋ = A x + B u` with the lag structure of the three actuators.
    pub fn derivative(&self, u: &Commands, taus: &PerPlayer<f64>) -> [f64; 7] {
        let x = &self.0;
        [
            x[YDOT_IT],
            x[A_I] - x[A_T],
            x[YDOT_ID],
            x[A_I] - x[A_D],
            (u.interceptor - x[A_I]) / taus.interceptor,
            (u.target - x[A_T]) / taus.target,
            (u.defender - x[A_D]) / taus.defender,
        ]
    }

    fn offset(&self, k: &[f64; 7], h: f64) -> Self {
        let mut out = self.0;
        for (o, d) in out.iter_mut().zip(k) {
            *o += h * d;
        }
        LinearState(out)
    }
}

/// One fixed RK4 step of the linear model with commands held over `dt`.
pub fn step_linear(x: &LinearState, u: &Commands, taus: &PerPlayer<f64>, dt: f64) -> LinearState {
    let k1 = x.derivative(u, taus);
    let k2 = x.offset(&k1, dt / 2.0).derivative(u, taus);
    let k3 = x.offset(&k2, dt / 2.0).derivative(u, taus);
    let k4 = x.offset(&k3, dt).derivative(u, taus);
    let mut out = x.0;
    for i in 0..LinearState::DIM {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    LinearState(out)
}

/// Integrates the linear model to `t_final` with RK4 steps of at most `dt`,
/// the last step shortened to land exactly on `t_final`.
pub fn propagate_linear(
    x: &LinearState,
    u: &Commands,
    taus: &PerPlayer<f64>,
    t0: f64,
    t_final: f64,
    dt: f64,
) -> LinearState {
    let span = t_final - t0;
    if span <= 0.0 {
        return *x;
    }
    let full = (span / dt).floor() as usize;
    let mut state = *x;
    for _ in 0..full {
        state = step_linear(&state, u, taus, dt);
    }
    let rest = span - full as f64 * dt;
    if rest > 1e-12 * dt {
        state = step_linear(&state, u, taus, rest);
    }
    state
}

/// Closed-form zero-order-hold propagator for a fixed step; exact for
/// piecewise-constant commands. Used on the environment fast path.
#[derive(Debug, Clone, Copy)]
pub struct ExactPropagator {
    dt: f64,
    decay: PerPlayer<f64>,
    single: PerPlayer<f64>,
    double: PerPlayer<f64>,
}

impl ExactPropagator {
    pub fn new(taus: &PerPlayer<f64>, dt: f64) -> Self {
        let decay = taus.map(|&tau| (-dt / tau).exp());
        let single = taus.map(|&tau| tau * (-(-dt / tau).exp_m1()));
        let double = taus.map(|&tau| tau * tau * phi(dt / tau));
        Self { dt, decay, single, double }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, x: &LinearState, u: &Commands) -> LinearState {
        let a = x.accels();
        let mut next_a = [0.0; 3];
        let mut int1 = [0.0; 3];
        let mut int2 = [0.0; 3];
        for (i, kind) in PlayerKind::ALL.iter().enumerate() {
            let gap = a[*kind] - u[*kind];
            next_a[i] = u[*kind] + gap * self.decay[*kind];
            int1[i] = u[*kind] * self.dt + gap * self.single[*kind];
            int2[i] = 0.5 * u[*kind] * self.dt * self.dt + gap * self.double[*kind];
        }
        let s = &x.0;
        LinearState([
            s[Y_IT] + s[YDOT_IT] * self.dt + int2[0] - int2[1],
            s[YDOT_IT] + int1[0] - int1[1],
            s[Y_ID] + s[YDOT_ID] * self.dt + int2[0] - int2[2],
            s[YDOT_ID] + int1[0] - int1[2],
            next_a[0],
            next_a[1],
            next_a[2],
        ])
    }
}

/// Planar point-mass state of one player.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub x: f64,
    pub y: f64,
    pub speed: f64,
    /// +1 when flying toward +X, −1 toward −X.
    pub heading: f64,
    pub flight_path_angle: f64,
    pub accel: f64,
}

/// Nonlinear engagement state. Lateral quantities are measured
/// perpendicular to the frame X axis, the nominal line of sight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearState {
    pub bodies: PerPlayer<Body>,
}

impl NonlinearState {
    /// Builds the geometry at t = 0 that corresponds to `x`: the target sits at
    /// its configured position with zero flight-path angle.
    pub fn from_linear(x: &LinearState, config: &EngagementConfig) -> Self {
        let target = Body {
            x: config.target.init_horizontal,
            y: config.target.init_vertical,
            speed: config.target.init_speed,
            heading: 1.0,
            flight_path_angle: 0.0,
            accel: x.0[A_T],
        };
        let v_i = config.interceptor.init_speed;
        let lateral_i = x.ydot_it() + target.speed * target.flight_path_angle.sin();
        let interceptor = Body {
            x: config.interceptor.init_horizontal,
            y: target.y + x.y_it(),
            speed: v_i,
            heading: -1.0,
            flight_path_angle: (lateral_i / v_i).asin(),
            accel: x.0[A_I],
        };
        let v_d = config.defender.init_speed;
        let lateral_d = lateral_i - x.ydot_id();
        let defender = Body {
            x: config.defender.init_horizontal,
            y: interceptor.y - x.y_id(),
            speed: v_d,
            heading: 1.0,
            flight_path_angle: (lateral_d / v_d).asin(),
            accel: x.0[A_D],
        };
        Self { bodies: PerPlayer::new(interceptor, target, defender) }
    }

    pub fn range(&self, other: PlayerKind) -> f64 {
        let i = &self.bodies.interceptor;
        let o = &self.bodies[other];
        (i.x - o.x).hypot(i.y - o.y)
    }

    /// Angle between the interceptor–`other` line of sight and the X axis.
    pub fn los_angle(&self, other: PlayerKind) -> f64 {
        let i = &self.bodies.interceptor;
        let o = &self.bodies[other];
        ((i.y - o.y) / (i.x - o.x).abs()).atan()
    }

    fn pack(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (k, kind) in PlayerKind::ALL.iter().enumerate() {
            let b = &self.bodies[*kind];
            out[4 * k..4 * k + 4].copy_from_slice(&[b.x, b.y, b.flight_path_angle, b.accel]);
        }
        out
    }

    fn unpack(&self, v: &[f64; 12]) -> Self {
        let mut next = *self;
        for (k, kind) in PlayerKind::ALL.iter().enumerate() {
            let b = &mut next.bodies[*kind];
            b.x = v[4 * k];
            b.y = v[4 * k + 1];
            b.flight_path_angle = v[4 * k + 2];
            b.accel = v[4 * k + 3];
        }
        next
    }

    fn derivative(&self, v: &[f64; 12], u: &Commands, taus: &PerPlayer<f64>) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (k, kind) in PlayerKind::ALL.iter().enumerate() {
            let b = &self.bodies[*kind];
            let (phi_k, a_k) = (v[4 * k + 2], v[4 * k + 3]);
            let (s, c) = phi_k.sin_cos();
            out[4 * k] = b.heading * b.speed * c;
            out[4 * k + 1] = b.speed * s;
            out[4 * k + 2] = a_k / b.speed;
            out[4 * k + 3] = (u[*kind] - a_k) / taus[*kind];
        }
        out
    }
}

/// Which interceptor pairings reached closest approach during a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Passage {
    pub target: bool,
    pub defender: bool,
}

impl Passage {
    pub fn any(&self) -> bool {
        self.target || self.defender
    }
}

/// One RK4 step of the nonlinear kinematics. The returned [`Passage`]
/// signals range closure (the along-track separation changed sign), which
/// ends that pairing rather than being integrated through.
pub fn step_nonlinear(s: &NonlinearState, u: &Commands, taus: &PerPlayer<f64>, dt: f64) -> (NonlinearState, Passage) {
    let v = s.pack();
    let shift = |k: &[f64; 12], h: f64| {
        let mut out = v;
        for (o, d) in out.iter_mut().zip(k) {
            *o += h * d;
        }
        out
    };
    let k1 = s.derivative(&v, u, taus);
    let k2 = s.derivative(&shift(&k1, dt / 2.0), u, taus);
    let k3 = s.derivative(&shift(&k2, dt / 2.0), u, taus);
    let k4 = s.derivative(&shift(&k3, dt), u, taus);
    let mut next = v;
    for i in 0..12 {
        next[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let next = s.unpack(&next);
    let closed = |other: PlayerKind| {
        let before = s.bodies.interceptor.x - s.bodies[other].x;
        let after = next.bodies.interceptor.x - next.bodies[other].x;
        before.signum() != after.signum() || after == 0.0
    };
    let passage = Passage { target: closed(PlayerKind::Target), defender: closed(PlayerKind::Defender) };
    (next, passage)
}

/// Projects the nonlinear geometry onto the seven-state linear model.
pub fn linearize(s: &NonlinearState) -> LinearState {
    let b = &s.bodies;
    let lateral = |body: &Body| body.speed * body.flight_path_angle.sin();
    LinearState([
        b.interceptor.y - b.target.y,
        lateral(&b.interceptor) - lateral(&b.target),
        b.interceptor.y - b.defender.y,
        lateral(&b.interceptor) - lateral(&b.defender),
        b.interceptor.accel,
        b.target.accel,
        b.defender.accel,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn taus() -> PerPlayer<f64> {
        EngagementConfig::table3().time_constants()
    }

    #[test]
    fn table3_interception_times() {
        let (t_it, t_id) = interception_times(&EngagementConfig::table3()).unwrap();
        assert!((t_it - 300e3 / 15.2e3).abs() < 1e-12);
        assert!((t_it - 19.736842).abs() < 1e-6);
        assert!((t_id - 11.842105).abs() < 1e-6);
    }

    #[test]
    fn zero_separation_gives_zero_time() {
        let mut cfg = EngagementConfig::table3();
        cfg.interceptor.init_horizontal = cfg.target.init_horizontal;
        assert_eq!(interception_times(&cfg).unwrap().0, 0.0);
    }

    #[test]
    fn non_positive_closing_speed_is_rejected() {
        let mut cfg = EngagementConfig::table3();
        cfg.interceptor.init_speed = -7.6e3;
        assert!(matches!(interception_times(&cfg), Err(SimError::NonPositiveClosingSpeed(_))));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn time_to_go_cases() {
        let t_f = 19.736842;
        assert!((time_to_go(5.0, t_f).remaining - 14.736842).abs() < 1e-12);
        assert_eq!(time_to_go(t_f, t_f).remaining, 0.0);
        assert_eq!(time_to_go(0.0, t_f).remaining, t_f);
        let late = time_to_go(t_f + 1.0, t_f);
        assert!(late.expired);
        assert_eq!(late.remaining, 0.0);
    }

    #[test]
    fn lag_examples() {
        // 60·(1 − e⁻¹)
        assert_relative_eq!(first_order_lag(0.0, 60.0, 0.05, 0.05), 37.92723353, epsilon = 1e-7);
        assert_eq!(first_order_lag(12.0, 12.0, 0.05, 0.3), 12.0);
        assert!((first_order_lag(-3.0, 60.0, 0.05, 5.0) - 60.0).abs() < 1e-9);
    }

    #[test]
    fn zero_accel_is_double_integrator() {
        let x = LinearState([10.0, -3.0, 4.0, 2.0, 0.0, 0.0, 0.0]);
        let next = step_linear(&x, &Commands::default(), &taus(), 0.001);
        assert_eq!(next.y_it(), 10.0 + 0.001 * -3.0);
        assert_eq!(next.y_id(), 4.0 + 0.001 * 2.0);
    }

    #[test]
    fn rk4_lag_row_matches_exact_solution() {
        let u = Commands::new(60.0, 0.0, 0.0);
        let next = step_linear(&LinearState::default(), &u, &taus(), 0.001);
        let exact = 60.0 * (1.0 - (-0.001f64 / 0.05).exp());
        assert!((next.0[A_I] - exact).abs() < 1e-6);
        assert_relative_eq!(next.0[A_I], 1.1880796, epsilon = 1e-7);
    }

    #[test]
    fn exact_propagator_matches_fine_rk4() {
        let x = LinearState([50.0, -4.0, -30.0, 6.0, 12.0, -3.0, 8.0]);
        let u = Commands::new(-60.0, 10.0, 20.0);
        let prop = ExactPropagator::new(&taus(), 0.1);
        let exact = prop.step(&x, &u);
        let rk = propagate_linear(&x, &u, &taus(), 0.0, 0.1, 1e-4);
        for i in 0..7 {
            assert!((exact.0[i] - rk.0[i]).abs() < 1e-9, "slot {i}: {} vs {}", exact.0[i], rk.0[i]);
        }
    }

    #[test]
    fn closing_speed_is_constant_in_linear_model() {
        let cfg = EngagementConfig::table3();
        let (t_it, _) = interception_times(&cfg).unwrap();
        let closing = cfg.interceptor.init_speed + cfg.target.init_speed;
        for t in [0.0, 3.5, 10.0, t_it] {
            let rho = 300e3 - closing * t;
            assert!((rho - closing * (t_it - t)).abs() < 1e-6);
        }
    }

    #[test]
    fn nonlinear_straight_flight_keeps_angles() {
        let cfg = EngagementConfig::table3();
        let s0 = NonlinearState::from_linear(&LinearState::default(), &cfg);
        let (s1, _) = step_nonlinear(&s0, &Commands::default(), &cfg.time_constants(), 0.01);
        for kind in PlayerKind::ALL {
            assert_eq!(s1.bodies[kind].flight_path_angle, s0.bodies[kind].flight_path_angle);
            assert_eq!(s1.bodies[kind].y, s0.bodies[kind].y);
        }
    }

    #[test]
    fn collinear_head_on_has_no_los_rate() {
        let mut cfg = EngagementConfig::table3();
        cfg.defender.init_vertical = cfg.target.init_vertical;
        let s0 = NonlinearState::from_linear(&LinearState::default(), &cfg);
        let (s1, _) = step_nonlinear(&s0, &Commands::default(), &cfg.time_constants(), 0.1);
        assert_eq!(s0.los_angle(PlayerKind::Target), 0.0);
        assert_eq!(s1.los_angle(PlayerKind::Target), 0.0);
        assert_eq!(linearize(&s1).y_it(), 0.0);
    }

    #[test]
    fn linearize_round_trips_at_start() {
        let cfg = EngagementConfig::table3();
        let x = LinearState([120.0, 3.0, 20.0, -5.0, 1.0, -2.0, 0.5]);
        let back = linearize(&NonlinearState::from_linear(&x, &cfg));
        for i in 0..7 {
            assert!((back.0[i] - x.0[i]).abs() < 1e-9, "slot {i}");
        }
    }

    #[test]
    fn target_climb_drives_y_it_negative() {
        let cfg = EngagementConfig::table3();
        let a_t = 10.0;
        let x0 = LinearState([0.0, 0.0, -100.0, 0.0, 0.0, a_t, 0.0]);
        let mut s = NonlinearState::from_linear(&x0, &cfg);
        let u = Commands::new(0.0, a_t, 0.0);
        let dt = 0.01;
        let steps = 500;
        for _ in 0..steps {
            s = step_nonlinear(&s, &u, &cfg.time_constants(), dt).0;
        }
        let t = dt * steps as f64;
        let expected = -a_t * t * t / 2.0;
        assert_relative_eq!(linearize(&s).y_it(), expected, max_relative = 1e-3);
    }

    #[test]
    fn small_angle_nonlinear_tracks_linear() {
        let cfg = EngagementConfig::table3();
        let taus = cfg.time_constants();
        let (t_it, _) = interception_times(&cfg).unwrap();
        let x0 = LinearState([150.0, 0.0, 50.0, 0.0, 0.0, 0.0, 0.0]);
        let u = Commands::new(-15.0, 8.0, 0.0);
        let mut lin = x0;
        let mut non = NonlinearState::from_linear(&x0, &cfg);
        let dt = 1e-3;
        let steps = (t_it / dt).floor() as usize - 1;
        let mut max_angle: f64 = 0.0;
        for _ in 0..steps {
            lin = step_linear(&lin, &u, &taus, dt);
            non = step_nonlinear(&non, &u, &taus, dt).0;
            for kind in PlayerKind::ALL {
                max_angle = max_angle.max(non.bodies[kind].flight_path_angle.abs());
            }
        }
        assert!(max_angle <= 0.05, "angle {max_angle}");
        let diff = (linearize(&non).y_it() - lin.y_it()).abs();
        assert!(diff < 0.01 * lin.y_it().abs(), "diff {diff} of {}", lin.y_it());
    }

    #[test]
    fn nonlinear_flags_passing() {
        let cfg = EngagementConfig::table3();
        let mut s = NonlinearState::from_linear(&LinearState([5.0, 0.0, 5.0, 0.0, 0.0, 0.0, 0.0]), &cfg);
        s.bodies.interceptor.x = s.bodies.defender.x + 1.0;
        let (_, passage) = step_nonlinear(&s, &Commands::default(), &cfg.time_constants(), 0.01);
        assert_eq!(passage, Passage { target: false, defender: true });
    }
}
