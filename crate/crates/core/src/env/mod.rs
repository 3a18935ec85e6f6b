//! Episode wrapper around the linear engagement: the team acts every
//! decision interval, the scripted interceptor every physics tick.

mod curriculum;
mod log;
mod observation;
mod reward;

pub use curriculum::{curriculum_stage, Curriculum, CurriculumStage};
pub use log::{write_outcome_json, write_trajectory_csv, TrajectoryRow, OUTCOME_SCHEMA};
pub use observation::*;
pub use reward::{medium_reward, step_reward, terminal_reward, RewardParams, RewardShaping};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    interception_times, Commands, EngagementConfig, ExactPropagator, LinearState, PerPlayer, PlayerKind, SimClock, Y_ID, Y_IT,
};
use crate::error::SimError;
use crate::guidance::{sogl_target_defender, AnalyticPolicy, Maneuverability};
use crate::seeding::{self, Stream};
use crate::zem::{zem, ZemPair};

/// Everything an engagement episode needs besides the adversary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub engagement: EngagementConfig,
    pub reward: RewardParams,
    #[serde(default)]
    pub observation: ObservationModel,
}

impl EnvConfig {
    pub fn table3() -> Self {
        Self {
            engagement: EngagementConfig::table3(),
            reward: RewardParams::default(),
            observation: ObservationModel::default(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.engagement.validate()?;
        self.reward.validate()?;
        self.observation.noise.validate()?;
        let (t_it, t_id) = interception_times(&self.engagement).map_err(|e| e.to_string())?;
        if !(t_it > 0.0 && t_id > 0.0) {
            return Err("both interception times must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub interceptor_destroyed: bool,
    pub target_killed: bool,
    pub success: bool,
}

/// Decides an episode from its miss distances: `miss_id` at t_ID and, when
/// the interceptor survived, `miss_it` at t_IT.
pub fn judge_outcome(miss_id: f64, miss_it: Option<f64>, cfg: &EngagementConfig) -> Verdict {
    let interceptor_destroyed = miss_id <= cfg.lethal_radius_id();
    let target_killed = !interceptor_destroyed && miss_it.is_some_and(|m| m <= cfg.lethal_radius_it());
    Verdict { interceptor_destroyed, target_killed, success: !target_killed }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub success: bool,
    pub interceptor_destroyed: bool,
    /// `|y_IT(t_IT)|`; absent when the interceptor was destroyed first.
    pub miss_it: Option<f64>,
    /// `|y_ID(t_ID)|`.
    pub miss_id: f64,
    pub t_end: f64,
    /// Undiscounted sum of step rewards.
    pub accumulated_reward: f64,
    /// `Σ γ^i r_i`.
    pub discounted_return: f64,
    pub steps: u32,
    pub stage: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub outcome: Option<EpisodeOutcome>,
}

/// How the protected pair is commanded during a decision interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TeamControl {
    /// Normalized `[u_T, u_D]` held for the whole interval.
    Hold([f64; 2]),
    /// The bang-bang pair law re-evaluated every physics tick on the ZEMs of
    /// a fresh observation (exact in perfect-information mode).
    Sogl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Idle,
    Running,
    Done,
}

/// One engagement episode. Not thread-safe by design; run one per worker.
#[derive(Debug, Clone)]
pub struct Engagement {
    cfg: EnvConfig,
    t_it: f64,
    t_id: f64,
    taus: PerPlayer<f64>,
    tick_step: ExactPropagator,
    ticks_per_decision: u64,
    maneuver: Maneuverability,
    adversary: AnalyticPolicy,
    stage: u8,
    state: LinearState,
    t: f64,
    tick: u64,
    steps: u32,
    defender_out: bool,
    destroyed: bool,
    frozen_z_id: f64,
    miss_id: f64,
    obs_rng: ChaCha8Rng,
    discount: f64,
    accumulated: f64,
    discounted: f64,
    phase: Phase,
    record: bool,
    rows: Vec<TrajectoryRow>,
}

impl Engagement {
    pub fn new(cfg: EnvConfig) -> Result<Self, SimError> {
        let (t_it, t_id) = interception_times(&cfg.engagement)?;
        let taus = cfg.engagement.time_constants();
        let tick_step = ExactPropagator::new(&taus, cfg.engagement.physics_dt);
        let ticks_per_decision = cfg.engagement.substeps() as u64;
        let maneuver = Maneuverability { max_accel: cfg.engagement.max_accels(), tau: taus };
        Ok(Self {
            t_it,
            t_id,
            taus,
            tick_step,
            ticks_per_decision,
            maneuver,
            adversary: AnalyticPolicy::NonManeuvering,
            stage: 0,
            state: LinearState::default(),
            t: 0.0,
            tick: 0,
            steps: 0,
            defender_out: false,
            destroyed: false,
            frozen_z_id: 0.0,
            miss_id: 0.0,
            obs_rng: seeding::rng(0, Stream::ObservationNoise),
            discount: 1.0,
            accumulated: 0.0,
            discounted: 0.0,
            phase: Phase::Idle,
            record: false,
            rows: Vec::new(),
            cfg,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    /// Keep a per-decision trajectory log from the next reset on.
    pub fn set_recording(&mut self, on: bool) {
        self.record = on;
    }

    pub fn trajectory(&self) -> &[TrajectoryRow] {
        &self.rows
    }

    pub fn state(&self) -> &LinearState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn interception_times(&self) -> (f64, f64) {
        (self.t_it, self.t_id)
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    /// Starts an episode against `adversary`. The interceptor's initial
    /// altitude is drawn from the configured range; all velocities and
    /// accelerations start at zero.
    pub fn reset(&mut self, adversary: &CurriculumStage, seed: u64) -> Observation {
        let mut rng = seeding::rng(seed, Stream::Environment);
        let e = &self.cfg.engagement;
        let [lo, hi] = e.interceptor_altitude_range;
        let altitude = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let mut x = LinearState::default();
        x.0[Y_IT] = altitude - e.target.init_vertical;
        x.0[Y_ID] = altitude - e.defender.init_vertical;
        self.reset_to(adversary, x, seed)
    }

    /// Starts an episode from an explicit initial state.
    pub fn reset_to(&mut self, adversary: &CurriculumStage, x: LinearState, seed: u64) -> Observation {
        self.adversary = adversary.interceptor_policy.clone();
        self.stage = adversary.stage;
        self.maneuver.max_accel.interceptor = adversary.interceptor_max_accel;
        self.state = x;
        self.t = 0.0;
        self.tick = 0;
        self.steps = 0;
        self.defender_out = false;
        self.destroyed = false;
        self.frozen_z_id = 0.0;
        self.miss_id = 0.0;
        self.obs_rng = seeding::rng(seed, Stream::ObservationNoise);
        self.discount = 1.0;
        self.accumulated = 0.0;
        self.discounted = 0.0;
        self.phase = Phase::Running;
        self.rows.clear();
        let z = self.zem_now();
        if self.record {
            self.rows.push(TrajectoryRow::new(self.t, &self.state, &Commands::default(), &z, 0.0));
        }
        self.observe(&z)
    }

    /// ZEM pair at the current instant; after t_ID the defender entry holds
    /// the terminal miss it achieved.
    pub fn zem_now(&self) -> ZemPair {
        let clock = SimClock { t: self.t.min(self.t_it), t_it: self.t_it, t_id: self.t_id };
        let mut z = zem(&self.state, &clock, &self.taus).expect("clock clamped to t_IT");
        if self.defender_out {
            z.z_id = self.frozen_z_id;
            z.t_go_id = 0.0;
        }
        z
    }

    pub fn perfect_observation(&self) -> Observation {
        let z = self.zem_now();
        Observation::perfect(&self.state, &z, self.maneuver.max_accel.interceptor, self.taus.interceptor)
    }

    fn observe(&mut self, z: &ZemPair) -> Observation {
        let perfect = Observation::perfect(&self.state, z, self.maneuver.max_accel.interceptor, self.taus.interceptor);
        observe(&perfect, &self.cfg.observation, &mut self.obs_rng)
    }

    /// Applies `action` (normalized target and defender commands) for one
    /// decision interval.
    pub fn step(&mut self, action: [f64; 2]) -> Result<StepResult, SimError> {
        self.advance(TeamControl::Hold(action))
    }

    /// Advances one decision interval under `control`.
    pub fn advance(&mut self, control: TeamControl) -> Result<StepResult, SimError> {
        match self.phase {
            Phase::Idle => return Err(SimError::NotReset),
            Phase::Done => return Err(SimError::StepAfterDone),
            Phase::Running => {}
        }
        if let TeamControl::Hold(action) = control {
            if let Some(bad) = action.iter().find(|a| !a.is_finite()) {
                return Err(SimError::NonFiniteAction(*bad));
            }
        }
        let e = &self.cfg.engagement.clone();
        let pdt = e.physics_dt;
        let end_tick = (self.steps as u64 + 1) * self.ticks_per_decision;
        let end = (end_tick as f64 * pdt).min(self.t_it);
        let mut terminal = None;
        let mut u_sum = Commands::default();
        let mut span = 0.0;
        while self.t < end && terminal.is_none() {
            let tick_time = (self.tick + 1) as f64 * pdt;
            let mut next = tick_time.min(end);
            if !self.defender_out && self.t_id > self.t && self.t_id < next {
                next = self.t_id;
            }
            let z = self.zem_now();
            let mut u = match control {
                TeamControl::Hold(action) => Commands::new(
                    0.0,
                    action[0].clamp(-1.0, 1.0) * e.target.max_accel,
                    action[1].clamp(-1.0, 1.0) * e.defender.max_accel,
                ),
                TeamControl::Sogl => {
                    let seen = match self.cfg.observation.mode {
                        ObservationMode::Perfect => z,
                        ObservationMode::Imperfect => self.observe(&z).zem(),
                    };
                    let (u_t, u_d) = sogl_target_defender(&seen, &self.maneuver.max_accel);
                    Commands::new(0.0, u_t, u_d)
                }
            };
            if self.defender_out {
                u.defender = 0.0;
            }
            u.interceptor = self.adversary.command(self.t, &z, &self.maneuver)?;
            let h = next - self.t;
            let on_grid = next == tick_time && self.t == self.tick as f64 * pdt;
            self.state = if on_grid {
                self.tick_step.step(&self.state, &u)
            } else {
                ExactPropagator::new(&self.taus, h).step(&self.state, &u)
            };
            for kind in PlayerKind::ALL {
                u_sum[kind] += u[kind] * h;
            }
            span += h;
            if next == tick_time {
                self.tick += 1;
            }
            self.t = next;
            if !self.defender_out && self.t >= self.t_id {
                self.miss_id = self.state.y_id().abs();
                self.frozen_z_id = self.state.y_id();
                self.defender_out = true;
                if judge_outcome(self.miss_id, None, e).interceptor_destroyed {
                    self.destroyed = true;
                    terminal = Some(true);
                }
            }
            if terminal.is_none() && self.t >= self.t_it {
                let v = judge_outcome(self.miss_id, Some(self.state.y_it().abs()), e);
                terminal = Some(v.success);
            }
        }
        self.steps += 1;
        let z = self.zem_now();
        let reward = step_reward(&z, terminal, &self.cfg.reward);
        self.accumulated += reward;
        self.discounted += self.discount * reward;
        self.discount *= self.cfg.reward.gamma;
        if self.record {
            let logged = u_sum.map(|v| if span > 0.0 { v / span } else { 0.0 });
            self.rows.push(TrajectoryRow::new(self.t, &self.state, &logged, &z, reward));
        }
        let observation = self.observe(&z);
        let outcome = terminal.map(|success| {
            self.phase = Phase::Done;
            EpisodeOutcome {
                success,
                interceptor_destroyed: self.destroyed,
                miss_it: (!self.destroyed).then(|| self.state.y_it().abs()),
                miss_id: self.miss_id,
                t_end: self.t,
                accumulated_reward: self.accumulated,
                discounted_return: self.discounted,
                steps: self.steps,
                stage: self.stage,
            }
        });
        Ok(StepResult { observation, reward, done: outcome.is_some(), outcome })
    }
}
