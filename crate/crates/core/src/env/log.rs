use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EpisodeOutcome;
use crate::dynamics::{Commands, LinearState};
use crate::zem::ZemPair;

pub const OUTCOME_SCHEMA: u32 = 1;

/// One decision-step record of an episode log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
    pub x5: f64,
    pub x6: f64,
    pub x7: f64,
    pub u_t: f64,
    pub u_d: f64,
    /// Interceptor command averaged over the interval.
    pub u_i: f64,
    pub z_it: f64,
    pub z_id: f64,
    pub r: f64,
}

impl TrajectoryRow {
    pub fn new(t: f64, x: &LinearState, u: &Commands, z: &ZemPair, r: f64) -> Self {
        let s = x.0;
        Self {
            t,
            x1: s[0],
            x2: s[1],
            x3: s[2],
            x4: s[3],
            x5: s[4],
            x6: s[5],
            x7: s[6],
            u_t: u.target,
            u_d: u.defender,
            u_i: u.interceptor,
            z_it: z.z_it,
            z_id: z.z_id,
            r,
        }
    }
}

pub fn write_trajectory_csv(path: &Path, rows: &[TrajectoryRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

#[derive(Serialize)]
struct OutcomeRecord<'a> {
    schema: u32,
    seed: u64,
    #[serde(flatten)]
    outcome: &'a EpisodeOutcome,
}

pub fn write_outcome_json(path: &Path, seed: u64, outcome: &EpisodeOutcome) -> std::io::Result<()> {
    let record = OutcomeRecord { schema: OUTCOME_SCHEMA, seed, outcome };
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &record)?;
    writeln!(f)
}
