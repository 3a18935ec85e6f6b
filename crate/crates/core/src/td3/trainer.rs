use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::agent::exploration_action;
use super::{Agent, ReplayBuffer, Td3Config, Transition};
use crate::env::{Curriculum, CurriculumStage, Engagement, EnvConfig, EpisodeOutcome};
use crate::error::TrainError;
use crate::nn::{save_checkpoint, Checkpoint, Mlp};
use crate::par::Par;
use crate::seeding::{self, Stream};

#[derive(Debug, Clone)]
pub struct TrainSpec {
    pub env: EnvConfig,
    pub td3: Td3Config,
    pub curriculum: Curriculum,
    pub episodes: u64,
    pub seed: u64,
    pub checkpoint_every: u64,
    /// Rollout parallelism; each round runs `workers` episodes on one actor snapshot.
    pub par: Par,
    /// Where checkpoints and the learning curve go; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: u64,
    pub accumulated_reward: f64,
    pub win: u8,
    pub stage: u8,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub curve: Vec<CurvePoint>,
    pub checkpoints: Vec<PathBuf>,
    pub agent: Agent,
    pub env_steps: u64,
}

struct Rollout {
    transitions: Vec<Transition>,
    outcome: EpisodeOutcome,
}

fn rollout(
    actor: &Mlp,
    env_cfg: &EnvConfig,
    stage: &CurriculumStage,
    episode_seed: u64,
    sigma: f64,
    warmup_left: u64,
) -> Result<Rollout, TrainError> {
    let mut env = Engagement::new(env_cfg.clone())?;
    let mut rng = seeding::rng(episode_seed, Stream::Exploration);
    let mut obs = env.reset(stage, episode_seed);
    let mut transitions = Vec::with_capacity(200);
    loop {
        let warmup = (transitions.len() as u64) < warmup_left;
        let action = exploration_action(actor, &obs, sigma, warmup, &mut rng);
        let r = env.step(action)?;
        transitions.push(Transition { obs, action, reward: r.reward, next_obs: r.observation, done: r.done });
        obs = r.observation;
        if let Some(outcome) = r.outcome {
            return Ok(Rollout { transitions, outcome });
        }
    }
}

fn checkpoint(dir: &Path, name: &str, agent: &Agent, episode: u64) -> Result<PathBuf, TrainError> {
    let path = dir.join(name);
    let ck = Checkpoint {
        net: agent.actor.clone(),
        optimizer: Some(agent.actor_opt.clone()),
        meta: serde_json::json!({
            "episode": episode,
            "critic_updates": agent.critic_updates,
            "actor_updates": agent.actor_updates,
        }),
    };
    save_checkpoint(&path, &ck)?;
    Ok(path)
}

/// Runs the curriculum-driven training loop. `progress` sees every episode
/// as it is logged.
pub fn train(spec: &TrainSpec, progress: &mut dyn FnMut(&CurvePoint)) -> Result<TrainReport, TrainError> {
    let cfg: &Td3Config = &spec.td3;
    let mut learner_rng = seeding::rng(spec.seed, Stream::Learner);
    let mut agent = Agent::new(cfg.clone(), &mut learner_rng);
    let mut buffer = ReplayBuffer::new(cfg.capacity);
    let mut curve = Vec::with_capacity(spec.episodes as usize);
    let mut checkpoints = Vec::new();
    let mut curve_file = match &spec.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            checkpoints.push(checkpoint(dir, &format!("actor_ep{:06}.ckpt", 0), &agent, 0)?);
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_path(dir.join("learning_curve.csv"))
                .map_err(std::io::Error::from)?;
            w.write_record(["episode", "accumulated_reward", "win", "stage"]).map_err(std::io::Error::from)?;
            w.flush()?;
            Some(w)
        }
        None => None,
    };
    let workers = if spec.par.is_parallel() { spec.par.workers.max(1) as u64 } else { 1 };
    let mut episode = 0u64;
    let mut env_steps = 0u64;
    let mut since_train = 0u64;
    while episode < spec.episodes {
        let round = workers.min(spec.episodes - episode);
        let stages: Vec<CurriculumStage> = (0..round)
            .map(|k| {
                let ep = episode + k;
                let mut rng = seeding::rng(seeding::episode_seed(spec.seed, ep), Stream::Curriculum);
                spec.curriculum.stage(ep, &mut rng)
            })
            .collect();
        let warmup_left = cfg.warmup_steps.saturating_sub(env_steps);
        let actor = &agent.actor;
        let results = spec.par.map(round as usize, |k| {
            let ep = episode + k as u64;
            rollout(actor, &spec.env, &stages[k], seeding::episode_seed(spec.seed, ep), cfg.exploration_sigma, warmup_left)
        });
        for (k, result) in results.into_iter().enumerate() {
            let r = result?;
            let n = r.transitions.len() as u64;
            env_steps += n;
            since_train += n;
            for t in r.transitions {
                buffer.push(t);
            }
            let point = CurvePoint {
                episode: episode + k as u64,
                accumulated_reward: r.outcome.accumulated_reward,
                win: r.outcome.success as u8,
                stage: stages[k].stage,
            };
            if let Some(w) = curve_file.as_mut() {
                w.serialize(point).map_err(std::io::Error::from)?;
            }
            progress(&point);
            curve.push(point);
        }
        if let Some(w) = curve_file.as_mut() {
            w.flush()?;
        }
        episode += round;
        if since_train >= cfg.train_frequency && buffer.len() >= cfg.batch {
            for _ in 0..since_train {
                let idx = buffer.sample_indices(cfg.batch, &mut learner_rng).expect("buffer holds a batch");
                let batch: Vec<Transition> = idx.into_iter().map(|i| *buffer.get(i)).collect();
                agent.update(&batch, &mut learner_rng)?;
            }
            since_train = 0;
        }
        if let Some(dir) = &spec.out_dir {
            let every = spec.checkpoint_every.max(1);
            if episode / every > (episode - round) / every {
                let mark = episode / every * every;
                checkpoints.push(checkpoint(dir, &format!("actor_ep{mark:06}.ckpt"), &agent, episode)?);
            }
        }
    }
    if let Some(dir) = &spec.out_dir {
        checkpoints.push(checkpoint(dir, "actor_final.ckpt", &agent, episode)?);
        let mut f = std::fs::File::create(dir.join("train_summary.json"))?;
        serde_json::to_writer_pretty(
            &mut f,
            &serde_json::json!({
                "episodes": episode,
                "env_steps": env_steps,
                "critic_updates": agent.critic_updates,
                "actor_updates": agent.actor_updates,
            }),
        )
        .map_err(std::io::Error::from)?;
        writeln!(f)?;
    }
    Ok(TrainReport { curve, checkpoints, agent, env_steps })
}
