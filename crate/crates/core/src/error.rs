use thiserror::Error;

/// Errors raised while loading or validating configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("reading config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        ConfigError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

/// Errors raised by the simulation and guidance layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("non-positive closing speed {0} m/s")]
    NonPositiveClosingSpeed(f64),
    #[error("stale clock: t = {t} s is past the final time {t_final} s")]
    StaleClock { t: f64, t_final: f64 },
    #[error("guidance gain singular: horizon integral = {integral}")]
    GainSingularity { integral: f64 },
    #[error("step called on a finished episode")]
    StepAfterDone,
    #[error("episode has not been reset")]
    NotReset,
    #[error("non-finite action component {0}")]
    NonFiniteAction(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Errors raised by network checkpoints.
#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad checkpoint: {0}")]
    Format(String),
    #[error("checkpoint header: {0}")]
    Header(#[from] serde_json::Error),
}

/// Errors raised by the TD3 learner.
#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training diverged: {what} = {value} after {updates} critic updates")]
    Divergence {
        what: &'static str,
        value: f64,
        updates: u64,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
