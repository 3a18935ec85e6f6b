use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn adsim(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adsim"))
        .args(args)
        .env("ADSIM_OUT", root)
        .output()
        .expect("run adsim")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn small_training_config(dir: &Path, extra_td3: &str) -> String {
    let path = dir.join("small.json");
    let text = format!(
        r#"{{
  "preset": "table3-desk",
  "td3": {{ "hidden": [8], "batch": 16, "train_frequency": 200, "warmup_steps": 50{extra_td3} }},
  "training": {{ "checkpoint_every": 1 }}
}}"#
    );
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_writes_outcome_and_is_deterministic() {
    let root = tempfile::tempdir().unwrap();
    let a = root.path().join("a");
    let b = root.path().join("b");
    for out in [&a, &b] {
        let o = adsim(root.path(), &["simulate", "table3", "--team", "sogl", "--interceptor", "none", "--seed", "1", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let outcome = json(a.join("outcome.json"));
    assert_eq!(outcome["success"], true);
    assert_eq!(outcome["seed"], 1);
    assert_eq!(std::fs::read(a.join("trajectory.csv")).unwrap(), std::fs::read(b.join("trajectory.csv")).unwrap());
    let m = json(a.join("manifest.json"));
    assert_eq!(m["command"]["subcommand"], "simulate");
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert!(m["artifacts"].as_array().unwrap().iter().any(|v| v == "trajectory.csv"));
}

#[test]
fn default_run_directories_live_under_the_output_root() {
    let root = tempfile::tempdir().unwrap();
    let o = adsim(root.path(), &["simulate", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dirs: Vec<String> = std::fs::read_dir(root.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert_eq!(dirs.len(), 1);
    assert!(dirs[0].starts_with("simulate-") && dirs[0].contains("-s3-"), "{}", dirs[0]);
}

#[test]
fn config_errors_exit_with_code_two() {
    let root = tempfile::tempdir().unwrap();
    let o = adsim(root.path(), &["simulate", "/no/such/config.json"]);
    assert_eq!(code(&o), 2);

    let typo = root.path().join("typo.json");
    std::fs::write(&typo, "{\n  \"reward\": {\n    \"sigma_terminl\": 8.0\n  }\n}\n").unwrap();
    let o = adsim(root.path(), &["simulate", typo.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let bound = root.path().join("bound.json");
    std::fs::write(&bound, r#"{"reward": {"sigma_terminal": 7.4}}"#).unwrap();
    assert_eq!(code(&adsim(root.path(), &["simulate", bound.to_str().unwrap()])), 2);

    assert_eq!(code(&adsim(root.path(), &["simulate", "--team", "agent"])), 2);
    assert_eq!(code(&adsim(root.path(), &["evaluate", "--checkpoint", "/no/such.ckpt"])), 2);
    assert_eq!(code(&adsim(root.path(), &["throughput", "--checkpoint", "final"])), 2);
    assert_eq!(code(&adsim(root.path(), &["simulate", "--interceptor", "zigzag"])), 2);
}

#[test]
fn train_flags_and_checkpoints() {
    let root = tempfile::tempdir().unwrap();
    let cfg = small_training_config(root.path(), "");

    let zero = root.path().join("zero");
    let o = adsim(root.path(), &["train", &cfg, "--episodes", "0", "--out", zero.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ckpts: Vec<String> = std::fs::read_dir(&zero)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".ckpt"))
        .collect();
    assert_eq!(ckpts.len(), 2, "{ckpts:?}");
    assert!(zero.join("actor_ep000000.ckpt").exists() && zero.join("actor_final.ckpt").exists());

    let sparse = root.path().join("sparse");
    let o = adsim(root.path(), &["train", &cfg, "--episodes", "2", "--reward", "sparse", "--curriculum", "off", "--out", sparse.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let curve = std::fs::read_to_string(sparse.join("learning_curve.csv")).unwrap();
    let rows: Vec<Vec<&str>> = curve.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r[1] == "7.5" || r[1] == "-7.5", "sparse reward {}", r[1]);
        assert_eq!(r[3], "3");
    }
    let m = json(sparse.join("manifest.json"));
    assert_eq!(m["config"]["reward"]["shaping"], "sparse");
    assert_eq!(m["config"]["curriculum"]["enabled"], false);
    assert!(sparse.join("actor_ep000002.ckpt").exists());
}

#[test]
fn divergence_exits_four_and_keeps_checkpoints() {
    let root = tempfile::tempdir().unwrap();
    let cfg = small_training_config(root.path(), r#", "divergence_limit": 1e-30"#);
    let out = root.path().join("div");
    let o = adsim(root.path(), &["train", &cfg, "--episodes", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(out.join("actor_ep000000.ckpt").exists());
    let m = json(out.join("manifest.json"));
    assert_eq!(m["exit_code"], 4);
    assert!(m["error"].as_str().unwrap().contains("diverged"));
}

#[test]
fn evaluate_sweep_robustness_and_throughput() {
    let root = tempfile::tempdir().unwrap();
    let ev = root.path().join("ev");
    let o = adsim(root.path(), &["evaluate", "--team", "sogl", "--n", "20", "--out", ev.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = json(ev.join("report.json"));
    assert_eq!(report["n"], 20);
    assert_eq!(report["seed_base"], 1_000_000);
    assert_eq!(std::fs::read_to_string(ev.join("outcomes.jsonl")).unwrap().lines().count(), 20);

    let sw = root.path().join("sw");
    let o = adsim(root.path(), &["sweep", "--amax", "2g,4g,6g,8g", "--tau", "0.02,0.05,0.1", "--n", "2", "--out", sw.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(sw.join("sweep.csv")).unwrap().lines().count(), 13);
    assert_eq!(std::fs::read_dir(sw.join("outcomes")).unwrap().count(), 12);

    let rb = root.path().join("rb");
    let o = adsim(root.path(), &["robustness", "--teams", "sogl,random", "--cases", "reference,case1", "--n", "2", "--out", rb.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(rb.join("robustness.csv")).unwrap().lines().count(), 1 + 2 * 4);

    let cfg = small_training_config(root.path(), "");
    let o = adsim(root.path(), &["train", &cfg, "--episodes", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tp = root.path().join("tp");
    let o = adsim(root.path(), &["throughput", "--checkpoint", "final", "--n", "2000", "--out", tp.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = json(tp.join("throughput.json"));
    assert!(t["agent"]["hz"].as_f64().unwrap() > 0.0);
    assert!(t["sogl"]["hz"].as_f64().unwrap() > 0.0);
    let m = json(tp.join("manifest.json"));
    assert!(Path::new(m["command"]["checkpoint"].as_str().unwrap()).is_absolute());
}

#[test]
fn replay_reproduces_and_checks_the_hash() {
    let root = tempfile::tempdir().unwrap();
    let first = root.path().join("first");
    let o = adsim(root.path(), &["simulate", "--team", "random", "--seed", "9", "--amax", "4g", "--out", first.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let again = root.path().join("again");
    let manifest = first.join("manifest.json");
    let o = adsim(root.path(), &["replay", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(std::fs::read(first.join("trajectory.csv")).unwrap(), std::fs::read(again.join("trajectory.csv")).unwrap());
    assert_eq!(json(first.join("manifest.json"))["config_hash"], json(again.join("manifest.json"))["config_hash"]);

    let mut m = json(manifest.clone());
    m["config"]["seed"] = Value::from(10);
    let tampered = root.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&m).unwrap()).unwrap();
    let o = adsim(root.path(), &["replay", tampered.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("hash mismatch"), "{}", stderr(&o));
}
