use std::path::{Path, PathBuf};
use std::sync::Arc;

use adsim::config::RunConfig;
use adsim::env::{write_outcome_json, write_trajectory_csv, RewardShaping};
use adsim::eval::{
    robustness_grid, run_episode, sweep_adaptiveness, imperfect_info_cases, throughput_agent, throughput_sogl, win_rate,
    write_outcomes_jsonl, write_robustness_csv, write_sweep_csv, Adversary, PolicySpec, TeamPolicy,
};
use adsim::guidance::AnalyticPolicy;
use adsim::nn::{load_checkpoint, Head, Mlp};
use adsim::par::{Execution, Par};
use adsim::td3::{train, TrainSpec, ACTION_DIM};
use adsim::env::OBS_DIM;
use serde_json::json;

use crate::args::*;
use crate::run::{out_root, Failure, RunDir};

/// Parses `6g` (multiple of `g`) or a bare number in m/s².
pub fn parse_accel(s: &str, g: f64) -> Result<f64, Failure> {
    let s = s.trim();
    let (num, scale) = match s.strip_suffix('g') {
        Some(n) => (n, g),
        None => (s, 1.0),
    };
    match num.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v * scale),
        _ => Err(Failure::Config(format!("bad acceleration `{s}`"))),
    }
}

fn apply_interceptor(cfg: &mut RunConfig, a: &InterceptorArgs) -> Result<(), Failure> {
    if let Some(name) = &a.interceptor {
        let eta = cfg.engagement.switching_radius;
        cfg.evaluation.interceptor = AnalyticPolicy::by_name(name, eta, cfg.engagement.gravity_g)
            .ok_or_else(|| Failure::Config(format!("unknown interceptor `{name}` (none, square, sogl, lqogl)")))?;
    }
    if let Some(amax) = &a.amax {
        cfg.evaluation.interceptor_max_accel = parse_accel(amax, cfg.engagement.gravity_g)?;
    }
    Ok(())
}

fn apply_mc(cfg: &mut RunConfig, mc: &McArgs) {
    if let Some(n) = mc.n {
        cfg.evaluation.n = n;
    }
    if let Some(s) = mc.seed_base {
        cfg.evaluation.seed_base = s;
    }
}

/// Loads the config named by the command and applies its flags.
pub fn effective_config(cmd: &Command, base: Option<RunConfig>) -> Result<RunConfig, Failure> {
    let common = match cmd {
        Command::Simulate(a) => &a.common,
        Command::Train(a) => &a.common,
        Command::Evaluate(a) => &a.common,
        Command::Sweep(a) => &a.common,
        Command::Robustness(a) => &a.common,
        Command::Throughput(a) => &a.common,
        Command::Replay(_) => unreachable!("replay is resolved before loading"),
    };
    let mut cfg = match base {
        Some(c) => c,
        None => RunConfig::load(&common.config).map_err(|e| Failure::Config(format!("{}: {e}", common.config)))?,
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    match cmd {
        Command::Simulate(a) => apply_interceptor(&mut cfg, &a.interceptor)?,
        Command::Train(a) => {
            if let Some(n) = a.episodes {
                cfg.training.episodes = n;
            }
            if let Some(r) = a.reward {
                cfg.reward.shaping = match r {
                    RewardArg::Sparse => RewardShaping::Sparse,
                    RewardArg::Shaped => RewardShaping::Shaped,
                };
            }
            if let Some(c) = a.curriculum {
                cfg.curriculum.enabled = c == Switch::On;
            }
            if let Some(w) = a.workers {
                cfg.training.workers = w;
            }
            if let Some(k) = a.checkpoint_every {
                cfg.training.checkpoint_every = k;
            }
        }
        Command::Evaluate(a) => {
            apply_interceptor(&mut cfg, &a.interceptor)?;
            apply_mc(&mut cfg, &a.mc);
        }
        Command::Sweep(a) => {
            apply_interceptor(&mut cfg, &InterceptorArgs { interceptor: a.interceptor.clone(), amax: None })?;
            apply_mc(&mut cfg, &a.mc);
        }
        Command::Robustness(a) => {
            apply_interceptor(&mut cfg, &a.interceptor)?;
            apply_mc(&mut cfg, &a.mc);
        }
        Command::Throughput(_) | Command::Replay(_) => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Turns `final`, a training run directory or a file into a checkpoint path.
pub fn resolve_checkpoint(spec: &str) -> Result<PathBuf, Failure> {
    let path = if spec == "final" || spec == "latest" {
        newest_final(&out_root())
            .ok_or_else(|| Failure::Config(format!("no finished training run under {}", out_root().display())))?
    } else {
        let p = PathBuf::from(spec);
        if p.is_dir() {
            p.join("actor_final.ckpt")
        } else {
            p
        }
    };
    if !path.is_file() {
        return Err(Failure::Config(format!("checkpoint not found: {}", path.display())));
    }
    Ok(std::fs::canonicalize(&path)?)
}

fn newest_final(root: &Path) -> Option<PathBuf> {
    std::fs::read_dir(root)
        .ok()?
        .filter_map(Result::ok)
        .filter(|e| e.file_name().to_string_lossy().starts_with("train-"))
        .map(|e| e.path().join("actor_final.ckpt"))
        .filter_map(|p| Some((p.metadata().ok()?.modified().ok()?, p)))
        .max()
        .map(|(_, p)| p)
}

/// Replaces every checkpoint reference with its absolute path so the
/// manifest stays valid when replayed from elsewhere.
pub fn resolve_paths(cmd: &mut Command) -> Result<(), Failure> {
    let slot = match cmd {
        Command::Simulate(a) => &mut a.team.checkpoint,
        Command::Evaluate(a) => &mut a.team.checkpoint,
        Command::Sweep(a) => &mut a.checkpoint,
        Command::Robustness(a) => &mut a.checkpoint,
        Command::Throughput(a) => &mut a.checkpoint,
        Command::Train(_) | Command::Replay(_) => return Ok(()),
    };
    if let Some(s) = slot.as_mut() {
        *s = resolve_checkpoint(s)?.to_string_lossy().into_owned();
    }
    Ok(())
}

fn load_actor(path: &str) -> Result<Arc<Mlp>, Failure> {
    let ck = load_checkpoint(Path::new(path)).map_err(|e| Failure::Config(format!("{path}: {e}")))?;
    let spec = ck.net.spec();
    if spec.input_dim != OBS_DIM || spec.output_dim != ACTION_DIM || spec.head != Head::Tanh {
        return Err(Failure::Config(format!("{path}: not a team actor ({}→{})", spec.input_dim, spec.output_dim)));
    }
    Ok(Arc::new(ck.net))
}

fn team_policy(team: Option<TeamArg>, checkpoint: Option<&str>) -> Result<TeamPolicy, Failure> {
    match (team, checkpoint) {
        (Some(TeamArg::Sogl), _) | (None, None) => Ok(TeamPolicy::SoglPair),
        (Some(TeamArg::Random), _) => Ok(TeamPolicy::Random),
        (Some(TeamArg::Agent) | None, Some(p)) => Ok(TeamPolicy::Agent(load_actor(p)?)),
        (Some(TeamArg::Agent), None) => Err(Failure::Config("--team agent needs --checkpoint".into())),
    }
}

fn teams(list: &[TeamArg], checkpoint: Option<&str>) -> Result<Vec<TeamPolicy>, Failure> {
    if list.is_empty() {
        let mut v = vec![TeamPolicy::SoglPair];
        if let Some(p) = checkpoint {
            v.insert(0, TeamPolicy::Agent(load_actor(p)?));
        }
        return Ok(v);
    }
    list.iter().map(|t| team_policy(Some(*t), checkpoint)).collect()
}

fn adversary(cfg: &RunConfig) -> Adversary {
    Adversary { policy: cfg.evaluation.interceptor.clone(), max_accel: cfg.evaluation.interceptor_max_accel }
}

fn par(workers: usize) -> Par {
    Par::new(Execution::Parallel, workers)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Runs `cmd` into `run`; returns a one-line summary for stdout.
pub fn dispatch(cmd: &Command, cfg: &RunConfig, run: &mut RunDir) -> Result<String, Failure> {
    match cmd {
        Command::Simulate(a) => simulate(a, cfg, run),
        Command::Train(_) => train_cmd(cfg, run),
        Command::Evaluate(a) => evaluate(a, cfg, run),
        Command::Sweep(a) => sweep(a, cfg, run),
        Command::Robustness(a) => robustness(a, cfg, run),
        Command::Throughput(a) => throughput_cmd(a, run),
        Command::Replay(_) => unreachable!("replay is resolved before dispatch"),
    }
}

fn simulate(a: &SimulateArgs, cfg: &RunConfig, run: &mut RunDir) -> Result<String, Failure> {
    let spec = PolicySpec {
        team: team_policy(a.team.team, a.team.checkpoint.as_deref())?,
        adversary: adversary(cfg),
        observation: cfg.observation,
    };
    let ep = run_episode(&spec, &cfg.env_config(), cfg.seed, true)?;
    write_trajectory_csv(&run.artifact("trajectory.csv"), &ep.trajectory)?;
    write_outcome_json(&run.artifact("outcome.json"), cfg.seed, &ep.outcome)?;
    let o = &ep.outcome;
    Ok(format!(
        "{} vs {}: success={} miss_id={:.4} m t_end={:.3} s reward={:.3}",
        spec.team.label(),
        spec.adversary.policy.name(),
        o.success,
        o.miss_id,
        o.t_end,
        o.accumulated_reward
    ))
}

fn train_cmd(cfg: &RunConfig, run: &mut RunDir) -> Result<String, Failure> {
    let spec = TrainSpec {
        env: cfg.env_config(),
        td3: cfg.td3.clone(),
        curriculum: cfg.curriculum.clone(),
        episodes: cfg.training.episodes,
        seed: cfg.seed,
        checkpoint_every: cfg.training.checkpoint_every,
        par: par(cfg.training.workers),
        out_dir: Some(run.dir.clone()),
    };
    let mut window = Vec::with_capacity(100);
    let result = train(&spec, &mut |p| {
        window.push(p.accumulated_reward);
        if window.len() == 100 {
            let mean = window.iter().sum::<f64>() / 100.0;
            eprintln!("episode {:>6}  stage {}  mean reward (last 100) {:>9.2}", p.episode + 1, p.stage, mean);
            window.clear();
        }
    });
    let mut files: Vec<String> = std::fs::read_dir(&run.dir)?
        .filter_map(Result::ok)
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n != crate::run::MANIFEST)
        .collect();
    files.sort();
    run.artifacts.extend(files);
    let report = result?;
    let last = report.checkpoints.last().map(|p| p.display().to_string()).unwrap_or_default();
    Ok(format!("trained {} episodes ({} env steps); final actor {last}", report.curve.len(), report.env_steps))
}

fn evaluate(a: &EvaluateArgs, cfg: &RunConfig, run: &mut RunDir) -> Result<String, Failure> {
    let spec = PolicySpec {
        team: team_policy(a.team.team, a.team.checkpoint.as_deref())?,
        adversary: adversary(cfg),
        observation: cfg.observation,
    };
    let e = &cfg.evaluation;
    let (report, outcomes) = win_rate(&spec, &cfg.env_config(), e.n, e.seed_base, par(a.mc.workers))?;
    write_outcomes_jsonl(&run.artifact("outcomes.jsonl"), e.seed_base, &outcomes)?;
    write_json(&run.artifact("report.json"), &report)?;
    Ok(format!(
        "{}: {}/{} wins, rate {:.3}, 95% CI [{:.3}, {:.3}]",
        spec.team.label(),
        report.wins,
        report.n,
        report.rate,
        report.ci95[0],
        report.ci95[1]
    ))
}

fn sweep(a: &SweepArgs, cfg: &RunConfig, run: &mut RunDir) -> Result<String, Failure> {
    let g = cfg.engagement.gravity_g;
    let amax = a.amax.iter().map(|s| parse_accel(s, g)).collect::<Result<Vec<_>, _>>()?;
    if amax.is_empty() || a.tau.is_empty() {
        return Err(Failure::Config("--amax and --tau need at least one value".into()));
    }
    if let Some(t) = a.tau.iter().find(|t| t.is_nan() || **t <= 0.0) {
        return Err(Failure::Config(format!("time constant {t} must be positive")));
    }
    let teams = teams(&a.teams, a.checkpoint.as_deref())?;
    let e = &cfg.evaluation;
    let cells = sweep_adaptiveness(&teams, &e.interceptor, &cfg.env_config(), &amax, &a.tau, e.n, e.seed_base, par(a.mc.workers))?;
    std::fs::create_dir_all(run.dir.join("outcomes"))?;
    for c in &cells {
        let name = format!("outcomes/{}_amax{}_tau{}.jsonl", c.team, c.max_accel, c.time_constant);
        write_outcomes_jsonl(&run.artifact(&name), e.seed_base, &c.outcomes)?;
    }
    write_sweep_csv(&run.artifact("sweep.csv"), &cells)?;
    write_json(&run.artifact("sweep.json"), &cells)?;
    Ok(format!("{} cells written to {}", cells.len(), run.dir.join("sweep.csv").display()))
}

fn robustness(a: &RobustnessArgs, cfg: &RunConfig, run: &mut RunDir) -> Result<String, Failure> {
    let all = imperfect_info_cases();
    let cases: Vec<_> = if a.cases.is_empty() {
        all
    } else {
        if let Some(bad) = a.cases.iter().find(|c| !all.iter().any(|k| &k.case == *c)) {
            return Err(Failure::Config(format!("unknown noise case `{bad}`")));
        }
        all.into_iter().filter(|k| a.cases.contains(&k.case)).collect()
    };
    let teams = teams(&a.teams, a.checkpoint.as_deref())?;
    let e = &cfg.evaluation;
    let cells = robustness_grid(&teams, &adversary(cfg), &cfg.env_config(), &cases, e.n, e.seed_base, par(a.mc.workers))?;
    std::fs::create_dir_all(run.dir.join("outcomes"))?;
    for c in &cells {
        let name = format!("outcomes/{}_{}.jsonl", c.team, c.case.label().replace(':', "_"));
        write_outcomes_jsonl(&run.artifact(&name), e.seed_base, &c.outcomes)?;
    }
    write_robustness_csv(&run.artifact("robustness.csv"), &cells)?;
    write_json(&run.artifact("robustness.json"), &cells)?;
    Ok(format!("{} cells written to {}", cells.len(), run.dir.join("robustness.csv").display()))
}

fn throughput_cmd(a: &ThroughputArgs, run: &mut RunDir) -> Result<String, Failure> {
    if a.n == 0 {
        return Err(Failure::Config("--n must be positive".into()));
    }
    let sogl = throughput_sogl(a.n);
    let agent = a.checkpoint.as_deref().map(load_actor).transpose()?.map(|actor| throughput_agent(&actor, a.n));
    write_json(&run.artifact("throughput.json"), &json!({ "sogl": sogl, "agent": agent }))?;
    let mut line = format!("sogl {:.3e} Hz", sogl.hz);
    if let Some(t) = agent {
        line += &format!(", agent {:.3e} Hz", t.hz);
    }
    Ok(line)
}
