//! Sequential vs data-parallel Monte-Carlo evaluation. Build with
//! `--no-default-features` to measure the build without rayon at all.

use std::hint::black_box;
use std::sync::Arc;

use adsim::env::{EnvConfig, ObservationModel};
use adsim::eval::{win_rate, Adversary, PolicySpec, TeamPolicy};
use adsim::guidance::AnalyticPolicy;
use adsim::nn::{Mlp, NetworkSpec};
use adsim::par::{Execution, Par};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EPISODES: usize = 32;

fn evaluation(c: &mut Criterion) {
    let base = EnvConfig::table3();
    let actor = Mlp::init(NetworkSpec::actor(13, 2, &[64, 64]), &mut ChaCha8Rng::seed_from_u64(0));
    let teams = [TeamPolicy::SoglPair, TeamPolicy::Agent(Arc::new(actor))];
    let mut group = c.benchmark_group("win_rate");
    group.sample_size(10);
    for team in teams {
        let spec = PolicySpec {
            team: team.clone(),
            adversary: Adversary { policy: AnalyticPolicy::Sogl { eta: 0.25 }, max_accel: 60.0 },
            observation: ObservationModel::default(),
        };
        for (label, par) in [("sequential", Par::SEQUENTIAL), ("parallel", Par::new(Execution::Parallel, 0))] {
            group.bench_with_input(BenchmarkId::new(team.label(), label), &par, |b, &par| {
                b.iter(|| black_box(win_rate(&spec, &base, EPISODES, 0, par).unwrap().0.wins))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, evaluation);
criterion_main!(benches);
