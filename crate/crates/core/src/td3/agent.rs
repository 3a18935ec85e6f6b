use ndarray::{s, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Td3Config, Transition, ACTION_DIM};
use crate::env::{Observation, OBS_DIM};
use crate::error::TrainError;
use crate::nn::{Adam, Mlp, NetworkSpec};

/// Actor, twin critics, their target copies and optimizer states.
#[derive(Debug, Clone)]
pub struct Agent {
    pub cfg: Td3Config,
    pub actor: Mlp,
    pub actor_target: Mlp,
    pub critics: [Mlp; 2],
    pub critic_targets: [Mlp; 2],
    pub actor_opt: Adam,
    pub critic_opts: [Adam; 2],
    pub critic_updates: u64,
    pub actor_updates: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: [f64; 2],
    /// Present when this update also moved the actor and the targets.
    pub actor_loss: Option<f64>,
}

/// Deterministic team action of `actor` for a raw observation.
pub fn policy_action(actor: &Mlp, obs: &Observation) -> [f64; 2] {
    let out = actor.forward(&obs.normalized()).expect("actor input width is the observation width");
    [out[0], out[1]]
}

/// Behaviour action: uniform on [−1, 1]² during warmup, otherwise the
/// policy plus Gaussian noise, clipped to the action box.
pub fn exploration_action<R: Rng + ?Sized>(actor: &Mlp, obs: &Observation, sigma: f64, warmup: bool, rng: &mut R) -> [f64; 2] {
    if warmup {
        return [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
    }
    let mut a = policy_action(actor, obs);
    if sigma > 0.0 {
        let noise = Normal::new(0.0, sigma).expect("sigma validated");
        for v in a.iter_mut() {
            *v = (*v + noise.sample(rng)).clamp(-1.0, 1.0);
        }
    }
    a
}

pub(crate) fn obs_matrix<'a>(rows: impl ExactSizeIterator<Item = &'a Observation>) -> Array2<f64> {
    let n = rows.len();
    let mut m = Array2::zeros((n, OBS_DIM));
    for (mut row, o) in m.rows_mut().into_iter().zip(rows) {
        row.assign(&ndarray::ArrayView1::from(&o.normalized()));
    }
    m
}

fn critic_input(obs: &Array2<f64>, actions: &Array2<f64>) -> Array2<f64> {
    ndarray::concatenate(Axis(1), &[obs.view(), actions.view()]).expect("equal row counts")
}

impl Agent {
    pub fn new<R: Rng + ?Sized>(cfg: Td3Config, rng: &mut R) -> Self {
        let actor = Mlp::init(NetworkSpec::actor(OBS_DIM, ACTION_DIM, &cfg.hidden), rng);
        let critic_spec = NetworkSpec::critic(OBS_DIM, ACTION_DIM, &cfg.hidden);
        let c1 = Mlp::init(critic_spec.clone(), rng);
        let c2 = Mlp::init(critic_spec, rng);
        let actor_opt = Adam::new(actor.len(), cfg.lr);
        let critic_opts = [Adam::new(c1.len(), cfg.lr), Adam::new(c2.len(), cfg.lr)];
        Self {
            actor_target: actor.clone(),
            critic_targets: [c1.clone(), c2.clone()],
            actor,
            critics: [c1, c2],
            actor_opt,
            critic_opts,
            critic_updates: 0,
            actor_updates: 0,
            cfg,
        }
    }

    pub fn act(&self, obs: &Observation) -> [f64; 2] {
        policy_action(&self.actor, obs)
    }

    /// Clipped double-Q bootstrap targets
    /// `U = r + (1 − done)·γ·min_i Q'_i(o', clip(π'(o') + ε))`.
    pub fn critic_target<R: Rng + ?Sized>(&self, batch: &[Transition], rng: &mut R) -> Vec<f64> {
        let next = obs_matrix(batch.iter().map(|t| &t.next_obs));
        let mut a = self.actor_target.forward_batch(next.view()).expect("widths").output().clone();
        if self.cfg.smoothing_sigma > 0.0 {
            let noise = Normal::new(0.0, self.cfg.smoothing_sigma).expect("sigma validated");
            let c = self.cfg.smoothing_clip;
            a.mapv_inplace(|v| (v + noise.sample(rng).clamp(-c, c)).clamp(-1.0, 1.0));
        }
        let input = critic_input(&next, &a);
        let q1 = self.critic_targets[0].forward_batch(input.view()).expect("widths");
        let q2 = self.critic_targets[1].forward_batch(input.view()).expect("widths");
        batch
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let q = q1.output()[[i, 0]].min(q2.output()[[i, 0]]);
                if t.done {
                    t.reward
                } else {
                    t.reward + self.cfg.gamma * q
                }
            })
            .collect()
    }

    fn guard(&self, what: &'static str, value: f64) -> Result<(), TrainError> {
        if !value.is_finite() || value.abs() > self.cfg.divergence_limit {
            return Err(TrainError::Divergence { what, value, updates: self.critic_updates });
        }
        Ok(())
    }

    /// One mean-squared regression step of both critics toward `targets`.
    pub fn critic_update(&mut self, batch: &[Transition], targets: &[f64]) -> Result<[f64; 2], TrainError> {
        let obs = obs_matrix(batch.iter().map(|t| &t.obs));
        let actions = Array2::from_shape_fn((batch.len(), ACTION_DIM), |(i, j)| batch[i].action[j]);
        let input = critic_input(&obs, &actions);
        let n = batch.len() as f64;
        let mut losses = [0.0; 2];
        #[allow(clippy::needless_range_loop)] // critics, optimizers and losses move in lockstep
        for k in 0..2 {
            let cache = self.critics[k].forward_batch(input.view()).expect("widths");
            let q = cache.output().column(0);
            let mut up = Array2::zeros((batch.len(), 1));
            let mut loss = 0.0;
            for i in 0..batch.len() {
                let r = q[i] - targets[i];
                loss += r * r;
                up[[i, 0]] = 2.0 * r / n;
            }
            losses[k] = loss / n;
            self.guard(if k == 0 { "critic1 loss" } else { "critic2 loss" }, losses[k])?;
            let mut grad = vec![0.0; self.critics[k].len()];
            self.critics[k].backward(&cache, up.view(), &mut grad);
            self.critic_opts[k].step(self.critics[k].params_mut(), &grad);
        }
        self.critic_updates += 1;
        Ok(losses)
    }

    /// One deterministic-policy-gradient step ascending `Q_1(o, π(o))`.
    pub fn actor_update(&mut self, batch: &[Transition]) -> Result<f64, TrainError> {
        let obs = obs_matrix(batch.iter().map(|t| &t.obs));
        let actor_cache = self.actor.forward_batch(obs.view()).expect("widths");
        let input = critic_input(&obs, actor_cache.output());
        let critic_cache = self.critics[0].forward_batch(input.view()).expect("widths");
        let n = batch.len() as f64;
        let loss = -critic_cache.output().sum() / n;
        self.guard("actor loss", loss)?;
        let up = Array2::from_elem((batch.len(), 1), -1.0 / n);
        let mut scratch = vec![0.0; self.critics[0].len()];
        let dq_dinput = self.critics[0].backward(&critic_cache, up.view(), &mut scratch);
        let dq_da = dq_dinput.slice(s![.., OBS_DIM..]);
        let mut grad = vec![0.0; self.actor.len()];
        self.actor.backward(&actor_cache, dq_da, &mut grad);
        self.actor_opt.step(self.actor.params_mut(), &grad);
        self.actor_updates += 1;
        Ok(loss)
    }

    pub fn soft_update_targets(&mut self) {
        let k = self.cfg.kappa;
        self.actor_target.soft_update_from(&self.actor, k);
        for i in 0..2 {
            self.critic_targets[i].soft_update_from(&self.critics[i], k);
        }
    }

    /// Critic step, plus actor and target steps every `policy_delay` critic steps.
    pub fn update<R: Rng + ?Sized>(&mut self, batch: &[Transition], rng: &mut R) -> Result<UpdateStats, TrainError> {
        let targets = self.critic_target(batch, rng);
        let critic_loss = self.critic_update(batch, &targets)?;
        let actor_loss = if self.critic_updates.is_multiple_of(self.cfg.policy_delay) {
            let loss = self.actor_update(batch)?;
            self.soft_update_targets();
            Some(loss)
        } else {
            None
        };
        Ok(UpdateStats { critic_loss, actor_loss })
    }
}
