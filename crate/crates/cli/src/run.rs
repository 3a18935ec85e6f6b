use std::path::{Path, PathBuf};

use adsim::config::RunConfig;
use adsim::error::{ConfigError, SimError, TrainError};
use serde::{Deserialize, Serialize};

use crate::args::Command;

pub const OUT_ENV: &str = "ADSIM_OUT";
pub const MANIFEST: &str = "manifest.json";
pub const MANIFEST_SCHEMA: u32 = 1;

/// Why a run stopped; each kind has a fixed exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Runtime(String),
    Divergence(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
            Failure::Divergence(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) | Failure::Divergence(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<TrainError> for Failure {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Divergence { .. } => Failure::Divergence(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config_hash: String,
    pub config: RunConfig,
    pub seed: u64,
    pub run_dir: PathBuf,
    pub artifacts: Vec<String>,
    pub started: String,
    pub finished: String,
    pub exit_code: u8,
    pub error: Option<String>,
}

pub fn out_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub struct RunDir {
    pub dir: PathBuf,
    pub artifacts: Vec<String>,
}

impl RunDir {
    /// `explicit` wins; otherwise `<root>/<sub>-<hash8>-s<seed>-<UTC stamp>`.
    pub fn open(explicit: Option<&Path>, sub: &str, cfg: &RunConfig) -> Result<Self, Failure> {
        let dir = match explicit {
            Some(d) => d.to_path_buf(),
            None => {
                let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
                let base = format!("{sub}-{}-s{}-{stamp}", &cfg.hash()[..8], cfg.seed);
                let root = out_root();
                let mut dir = root.join(&base);
                let mut k = 1;
                while dir.exists() {
                    dir = root.join(format!("{base}-{k}"));
                    k += 1;
                }
                dir
            }
        };
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, artifacts: Vec::new() })
    }

    /// Path for artifact `name`, recorded in the manifest.
    pub fn artifact(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.dir.join(name)
    }
}

pub fn write_manifest(path: &Path, m: &RunManifest) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(m).map_err(std::io::Error::from)?;
    std::fs::write(path, text + "\n")
}

pub fn read_manifest(path: &Path) -> Result<RunManifest, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}
