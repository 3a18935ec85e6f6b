use adsim::env::{Curriculum, EnvConfig, Observation, OBS_DIM};
use adsim::error::TrainError;
use adsim::nn::load_checkpoint;
use adsim::par::{Execution, Par};
use adsim::td3::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn obs(v: f64) -> Observation {
    Observation([v; OBS_DIM])
}

fn tr(r: f64, done: bool) -> Transition {
    Transition { obs: obs(0.1), action: [0.2, -0.3], reward: r, next_obs: obs(0.2), done }
}

fn small_cfg() -> Td3Config {
    Td3Config { hidden: vec![16, 16], batch: 16, capacity: 512, train_frequency: 200, warmup_steps: 100, ..Default::default() }
}

#[test]
fn buffer_is_fifo_at_capacity() {
    let mut b = ReplayBuffer::new(5120);
    for i in 0..5121 {
        b.push(tr(i as f64, false));
    }
    assert_eq!(b.len(), 5120);
    let rewards: Vec<f64> = b.iter_oldest_first().map(|t| t.reward).collect();
    assert_eq!(rewards[0], 1.0);
    assert_eq!(*rewards.last().unwrap(), 5120.0);
    assert!(!rewards.contains(&0.0));
}

#[test]
fn buffer_sampling_is_uniform() {
    let mut b = ReplayBuffer::new(10);
    for i in 0..10 {
        b.push(tr(i as f64, false));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut counts = [0usize; 10];
    let draws = 100_000;
    for _ in 0..draws / 10 {
        for i in b.sample_indices(10, &mut rng).unwrap() {
            counts[i] += 1;
        }
    }
    let mean = draws as f64 / 10.0;
    let sd = (draws as f64 * 0.1 * 0.9).sqrt();
    assert!(counts.iter().all(|c| (*c as f64 - mean).abs() <= 3.0 * sd), "{counts:?}");
    assert!(ReplayBuffer::new(4).sample(1, &mut rng).is_none());
}

fn constant_targets(agent: &mut Agent, q1: f64, q2: f64) {
    for (k, q) in [q1, q2].into_iter().enumerate() {
        let net = &mut agent.critic_targets[k];
        net.params_mut().fill(0.0);
        let n = net.len();
        net.params_mut()[n - 1] = q;
    }
}

#[test]
fn critic_target_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut agent = Agent::new(Td3Config { smoothing_sigma: 0.0, ..small_cfg() }, &mut rng);
    constant_targets(&mut agent, 2.0, 7.0);
    let u = agent.critic_target(&[tr(1.0, false), tr(1.0, true)], &mut rng);
    assert!((u[0] - 2.98).abs() < 1e-12);
    assert_eq!(u[1], 1.0);
    constant_targets(&mut agent, 3.0, 5.0);
    let u = agent.critic_target(&[tr(0.0, false)], &mut rng);
    assert!((u[0] - 0.99 * 3.0).abs() < 1e-12);
}

#[test]
fn clipped_double_q_never_exceeds_single_critics() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let agent = Agent::new(Td3Config { smoothing_sigma: 0.0, ..small_cfg() }, &mut rng);
    let batch: Vec<Transition> = (0..64)
        .map(|i| Transition { obs: obs(i as f64), action: [0.0, 0.0], reward: 0.5, next_obs: obs(i as f64 * 3.0 - 50.0), done: false })
        .collect();
    let u = agent.critic_target(&batch, &mut rng);
    for (k, t) in batch.iter().enumerate() {
        let a = adsim::td3::policy_action(&agent.actor_target, &t.next_obs);
        let mut x = t.next_obs.normalized().to_vec();
        x.extend(a);
        for c in &agent.critic_targets {
            let single = t.reward + 0.99 * c.forward(&x).unwrap()[0];
            assert!(u[k] <= single + 1e-12);
        }
    }
}

#[test]
fn delayed_updates_and_exact_soft_update() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut agent = Agent::new(small_cfg(), &mut rng);
    let batch: Vec<Transition> = (0..16).map(|i| tr(i as f64 * 0.1, i % 5 == 0)).collect();
    for i in 1..=11u64 {
        let before = agent.critic_targets[0].clone();
        let stats = agent.update(&batch, &mut rng).unwrap();
        assert_eq!(stats.actor_loss.is_some(), i % 2 == 0);
        if i % 2 == 0 {
            for ((new, old), src) in agent.critic_targets[0].params().iter().zip(before.params()).zip(agent.critics[0].params()) {
                assert_eq!(*new, 5e-3 * src + (1.0 - 5e-3) * old);
            }
        } else {
            assert_eq!(agent.critic_targets[0], before);
        }
    }
    assert_eq!(agent.critic_updates, 11);
    assert_eq!(agent.actor_updates, 11 / 2);
}

#[test]
fn critic_overfits_fixed_batch() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agent = Agent::new(small_cfg(), &mut rng);
    let batch: Vec<Transition> = (0..16).map(|i| Transition { obs: obs(i as f64 * 10.0), ..tr(i as f64 * 0.2, false) }).collect();
    let targets: Vec<f64> = batch.iter().map(|t| t.reward).collect();
    let first = agent.critic_update(&batch, &targets).unwrap();
    let mut last = first;
    for _ in 0..50 {
        last = agent.critic_update(&batch, &targets).unwrap();
    }
    assert!(last[0] < first[0] && last[1] < first[1]);
    assert_ne!(agent.critics[0], agent.critics[1]);
}

#[test]
fn actor_climbs_critic_to_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut agent = Agent::new(Td3Config { hidden: vec![32, 32], lr: 1e-3, ..small_cfg() }, &mut rng);
    let sample = |rng: &mut ChaCha8Rng| -> Vec<Transition> {
        (0..64)
            .map(|_| {
                let o = Observation(std::array::from_fn(|_| rng.random_range(-100.0..100.0)));
                Transition { obs: o, action: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)], reward: 0.0, next_obs: o, done: true }
            })
            .collect()
    };
    for _ in 0..3000 {
        let batch = sample(&mut rng);
        let targets: Vec<f64> = batch.iter().map(|t| -(t.action[0] - 0.5).powi(2)).collect();
        agent.critic_update(&batch, &targets).unwrap();
    }
    for _ in 0..600 {
        let batch = sample(&mut rng);
        agent.actor_update(&batch).unwrap();
    }
    let probe = sample(&mut rng);
    let mean = probe.iter().map(|t| agent.act(&t.obs)[0]).sum::<f64>() / probe.len() as f64;
    assert!((mean - 0.5).abs() < 0.05, "mean action {mean}");
}

#[test]
fn flat_critic_leaves_actor_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut agent = Agent::new(small_cfg(), &mut rng);
    agent.critics[0].params_mut().fill(0.0);
    let before = agent.actor.clone();
    agent.actor_update(&[tr(0.0, false); 8]).unwrap();
    assert_eq!(agent.actor, before);
}

#[test]
fn exploration_actions() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let agent = Agent::new(small_cfg(), &mut rng);
    let o = obs(3.0);
    let a = agent.act(&o);
    assert_eq!(exploration_action(&agent.actor, &o, 0.0, false, &mut rng), a);
    let mut warm_sum = [0.0; 2];
    for _ in 0..100_000 {
        let e = exploration_action(&agent.actor, &o, 0.5, false, &mut rng);
        assert!(e.iter().all(|v| v.abs() <= 1.0));
        let w = exploration_action(&agent.actor, &o, 0.5, true, &mut rng);
        assert!(w.iter().all(|v| v.abs() <= 1.0));
        warm_sum[0] += w[0];
        warm_sum[1] += w[1];
    }
    assert!(warm_sum.iter().all(|s| (s / 1e5).abs() < 0.01));
}

fn spec(episodes: u64, out: Option<std::path::PathBuf>, par: Par) -> TrainSpec {
    TrainSpec {
        env: EnvConfig::table3(),
        td3: small_cfg(),
        curriculum: Curriculum::standard(0.25),
        episodes,
        seed: 9,
        checkpoint_every: 2,
        par,
        out_dir: out,
    }
}

#[test]
fn zero_episodes_writes_initial_checkpoint_only() {
    let dir = tempfile::tempdir().unwrap();
    let r = train(&spec(0, Some(dir.path().into()), Par::SEQUENTIAL), &mut |_| {}).unwrap();
    assert!(r.curve.is_empty());
    assert!(dir.path().join("actor_ep000000.ckpt").exists());
    let ck = load_checkpoint(&dir.path().join("actor_final.ckpt")).unwrap();
    assert_eq!(ck.net, r.agent.actor);
}

#[test]
fn training_is_reproducible_and_staged() {
    let dir = tempfile::tempdir().unwrap();
    let a = train(&spec(5, Some(dir.path().into()), Par::SEQUENTIAL), &mut |_| {}).unwrap();
    let b = train(&spec(5, None, Par::SEQUENTIAL), &mut |_| {}).unwrap();
    assert_eq!(a.curve, b.curve);
    assert_eq!(a.agent.actor, b.agent.actor);
    assert!(a.agent.critic_updates > 0);
    assert!(a.curve.iter().all(|p| p.stage == 1));
    for ep in [0, 2, 4] {
        assert!(dir.path().join(format!("actor_ep{ep:06}.ckpt")).exists());
    }
    let text = std::fs::read_to_string(dir.path().join("learning_curve.csv")).unwrap();
    assert!(text.starts_with("episode,accumulated_reward,win,stage\n"));
    assert_eq!(text.lines().count(), 6);
    let p = Par::new(Execution::Parallel, 2);
    let c = train(&spec(4, None, p), &mut |_| {}).unwrap();
    let d = train(&spec(4, None, p), &mut |_| {}).unwrap();
    assert_eq!(c.curve, d.curve);
}

#[test]
fn divergence_aborts_and_keeps_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(5, Some(dir.path().into()), Par::SEQUENTIAL);
    s.td3.divergence_limit = 1e-30;
    match train(&s, &mut |_| {}) {
        Err(TrainError::Divergence { .. }) => {}
        other => panic!("expected divergence, got {:?}", other.map(|r| r.curve.len())),
    }
    assert!(dir.path().join("actor_ep000000.ckpt").exists());
}
