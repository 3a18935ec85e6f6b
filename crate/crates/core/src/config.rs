//! Run configuration: named presets, JSON override files, g-multiple
//! convenience keys and a stable content hash.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::dynamics::EngagementConfig;
use crate::env::{Curriculum, EnvConfig, ObservationModel, RewardParams};
use crate::error::ConfigError;
use crate::guidance::AnalyticPolicy;
use crate::td3::Td3Config;

pub const PRESETS: [&str; 2] = ["table3", "table3-desk"];
/// Hidden widths of the reduced network profile used for desk-scale training.
pub const DESK_HIDDEN: [usize; 2] = [64, 64];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSettings {
    pub episodes: u64,
    pub checkpoint_every: u64,
    /// Rollout workers; 0 = one per core, 1 = sequential and reproducible.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSettings {
    pub n: usize,
    pub seed_base: u64,
    pub interceptor: AnalyticPolicy,
    pub interceptor_max_accel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub engagement: EngagementConfig,
    pub reward: RewardParams,
    pub observation: ObservationModel,
    pub curriculum: Curriculum,
    pub td3: Td3Config,
    pub training: TrainingSettings,
    pub evaluation: EvalSettings,
}

impl RunConfig {
    pub fn table3() -> Self {
        let engagement = EngagementConfig::table3();
        let eta = engagement.switching_radius;
        Self {
            seed: 0,
            curriculum: Curriculum::standard(eta),
            evaluation: EvalSettings {
                n: 500,
                seed_base: 1_000_000,
                interceptor: AnalyticPolicy::Sogl { eta },
                interceptor_max_accel: engagement.interceptor.max_accel,
            },
            engagement,
            reward: RewardParams::default(),
            observation: ObservationModel::default(),
            td3: Td3Config::default(),
            training: TrainingSettings { episodes: 20_000, checkpoint_every: 100, workers: 1 },
        }
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        match name {
            "table3" => Ok(Self::table3()),
            "table3-desk" => {
                let mut c = Self::table3();
                c.td3.hidden = DESK_HIDDEN.to_vec();
                c.training.episodes = 5000;
                Ok(c)
            }
            _ => Err(ConfigError::UnknownPreset(name.to_string())),
        }
    }

    pub fn env_config(&self) -> EnvConfig {
        EnvConfig { engagement: self.engagement.clone(), reward: self.reward, observation: self.observation }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = ConfigError::Invalid;
        self.env_config().validate().map_err(invalid)?;
        self.curriculum.validate().map_err(invalid)?;
        self.td3.validate().map_err(invalid)?;
        self.evaluation.interceptor.validate().map_err(invalid)?;
        if (self.td3.gamma - self.reward.gamma).abs() > 0.0 {
            return Err(invalid(format!(
                "td3.gamma ({}) and reward.gamma ({}) must agree",
                self.td3.gamma, self.reward.gamma
            )));
        }
        if self.evaluation.n == 0 {
            return Err(invalid("evaluation.n must be >= 1".into()));
        }
        if !(self.evaluation.interceptor_max_accel >= 0.0) {
            return Err(invalid("evaluation.interceptor_max_accel must be >= 0".into()));
        }
        Ok(())
    }

    /// Loads `source`: a preset name, or a JSON file whose optional
    /// `"preset"` key (default `table3`) names the base that the remaining
    /// keys override.
    pub fn load(source: &str) -> Result<Self, ConfigError> {
        let path = Path::new(source);
        if !path.exists() && PRESETS.contains(&source) {
            let c = Self::preset(source)?;
            c.validate()?;
            return Ok(c);
        }
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: source.to_string(), source: e })?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let mut overrides: Value = serde_json::from_str(text).map_err(ConfigError::from_json)?;
        let obj = overrides
            .as_object_mut()
            .ok_or_else(|| ConfigError::Invalid("config must be a JSON object".into()))?;
        let preset = match obj.remove("preset") {
            None => "table3".to_string(),
            Some(Value::String(s)) => s,
            Some(_) => return Err(ConfigError::Invalid("`preset` must be a string".into())),
        };
        let base = Self::preset(&preset)?;
        let mut merged = serde_json::to_value(&base).expect("config serializes");
        let g = obj
            .get("engagement")
            .and_then(|e| e.get("gravity_g"))
            .and_then(Value::as_f64)
            .unwrap_or(base.engagement.gravity_g);
        resolve_g_multiples(&mut overrides, g)?;
        merge(&mut merged, overrides);
        let config: RunConfig = serde_path_to_error::deserialize(merged).map_err(|e| locate(text, e))?;
        config.validate()?;
        Ok(config)
    }

    /// Canonical JSON (fixed field order, shortest round-trip floats).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

const G_KEYS: [&str; 5] = ["max_accel", "interceptor_max_accel", "stage2_max_accel", "stage3_max_accels", "amplitude"];

/// Rewrites `<key>_g` entries (numbers or arrays of numbers, in multiples
/// of g) into `<key>` in SI units.
fn resolve_g_multiples(v: &mut Value, g: f64) -> Result<(), ConfigError> {
    match v {
        Value::Object(map) => {
            for key in G_KEYS {
                let g_key = format!("{key}_g");
                if let Some(raw) = map.remove(&g_key) {
                    if map.contains_key(key) {
                        return Err(ConfigError::Invalid(format!("both `{key}` and `{g_key}` given")));
                    }
                    map.insert(key.to_string(), scale(&raw, g, &g_key)?);
                }
            }
            for child in map.values_mut() {
                resolve_g_multiples(child, g)?;
            }
        }
        Value::Array(items) => {
            for child in items {
                resolve_g_multiples(child, g)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn scale(raw: &Value, g: f64, key: &str) -> Result<Value, ConfigError> {
    let bad = || ConfigError::Invalid(format!("`{key}` must be a number or a list of numbers"));
    match raw {
        Value::Number(n) => Ok(Value::from(n.as_f64().ok_or_else(bad)? * g)),
        Value::Array(items) => items.iter().map(|i| scale(i, g, key)).collect::<Result<Vec<_>, _>>().map(Value::Array),
        _ => Err(bad()),
    }
}

/// Deep merge: objects merge key by key, everything else is replaced.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => merge_maps(b, o),
        (b, o) => *b = o,
    }
}

fn merge_maps(base: &mut Map<String, Value>, over: Map<String, Value>) {
    for (k, v) in over {
        match base.get_mut(&k) {
            // Tagged policy objects are replaced whole so switching variant
            // does not inherit the old variant's fields.
            Some(slot) if !v.get("name").is_some_and(Value::is_string) => merge(slot, v),
            _ => {
                base.insert(k, v);
            }
        }
    }
}

/// Turns a post-merge deserialization error into a diagnostic pointing at
/// the offending key in the source text when it can be found.
fn locate(text: &str, err: serde_path_to_error::Error<serde_json::Error>) -> ConfigError {
    let path = err.path().to_string();
    let message = format!("{path}: {}", err.inner());
    let inner = err.inner().to_string();
    let key = inner.split('`').nth(1).map(str::to_string).or_else(|| path.rsplit('.').next().map(str::to_string));
    if let Some(key) = key {
        let needle = format!("\"{key}\"");
        for (i, line) in text.lines().enumerate() {
            if let Some(col) = line.find(&needle) {
                return ConfigError::Parse { line: i + 1, column: col + 1, message };
            }
        }
    }
    ConfigError::Invalid(message)
}
