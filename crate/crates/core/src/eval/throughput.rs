use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{EngagementConfig, LinearState, SimClock};
use crate::env::Observation;
use crate::guidance::sogl_target_defender;
use crate::nn::Mlp;
use crate::td3::policy_action;
use crate::zem::zem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub inferences: usize,
    pub seconds: f64,
    pub hz: f64,
}

/// Times `n` sequential calls of `f(i)` after a short warm-up.
pub fn throughput<T>(n: usize, mut f: impl FnMut(usize) -> T) -> Throughput {
    for i in 0..n.min(1000) {
        black_box(f(i));
    }
    let start = Instant::now();
    for i in 0..n {
        black_box(f(black_box(i)));
    }
    let seconds = start.elapsed().as_secs_f64();
    Throughput { inferences: n, seconds, hz: n as f64 / seconds }
}

fn probe_states(k: usize) -> Vec<LinearState> {
    (0..k)
        .map(|i| {
            let s = i as f64;
            LinearState([
                (s * 0.37).sin() * 150.0,
                (s * 0.11).cos() * 5.0,
                (s * 0.23).sin() * 150.0 - 100.0,
                (s * 0.05).cos() * 5.0,
                (s * 0.7).sin() * 60.0,
                (s * 0.3).cos() * 10.0,
                (s * 0.9).sin() * 20.0,
            ])
        })
        .collect()
}

/// Team-command rate of a trained actor: normalization plus a forward pass
/// per observation.
pub fn throughput_agent(actor: &Mlp, n: usize) -> Throughput {
    let cfg = EngagementConfig::table3();
    let clock = SimClock::start(&cfg).expect("preset is valid").at(3.0);
    let taus = cfg.time_constants();
    let observations: Vec<Observation> = probe_states(64)
        .iter()
        .map(|x| Observation::perfect(x, &zem(x, &clock, &taus).expect("clock in range"), 60.0, 0.05))
        .collect();
    throughput(n, |i| policy_action(actor, &observations[i % observations.len()]))
}

/// Team-command rate of the bang-bang pair law: ZEM evaluation plus the law.
pub fn throughput_sogl(n: usize) -> Throughput {
    let cfg = EngagementConfig::table3();
    let clock = SimClock::start(&cfg).expect("preset is valid").at(3.0);
    let taus = cfg.time_constants();
    let max = cfg.max_accels();
    let states = probe_states(64);
    throughput(n, |i| {
        let z = zem(&states[i % states.len()], &clock, &taus).expect("clock in range");
        sogl_target_defender(&z, &max)
    })
}
