use adsim::dynamics::*;
use adsim::guidance::sogl_interceptor;
use adsim::zem::*;
use proptest::prelude::*;

fn cfg() -> EngagementConfig {
    EngagementConfig::table3()
}

fn state() -> impl Strategy<Value = LinearState> {
    (
        prop::array::uniform4(-500.0..500.0f64),
        -60.0..60.0f64,
        -10.0..10.0f64,
        -20.0..20.0f64,
    )
        .prop_map(|(p, a_i, a_t, a_d)| LinearState([p[0], p[1] / 5.0, p[2], p[3] / 5.0, a_i, a_t, a_d]))
}

fn commands() -> impl Strategy<Value = Commands> {
    (-60.0..60.0f64, -10.0..10.0f64, -20.0..20.0f64).prop_map(|(i, t, d)| PerPlayer::new(i, t, d))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn propagation_is_linear(x1 in state(), x2 in state(), u1 in commands(), u2 in commands(), dt in 1e-3..0.5f64) {
        let taus = cfg().time_constants();
        let p = ExactPropagator::new(&taus, dt);
        let sum = LinearState(std::array::from_fn(|i| x1.0[i] + x2.0[i]));
        let u = PerPlayer::new(u1.interceptor + u2.interceptor, u1.target + u2.target, u1.defender + u2.defender);
        let (a, b, c) = (p.step(&sum, &u), p.step(&x1, &u1), p.step(&x2, &u2));
        for i in 0..LinearState::DIM {
            prop_assert!(close(a.0[i], b.0[i] + c.0[i], 1e-12));
        }
    }

    #[test]
    fn zem_is_homogeneous(x in state(), k in -5.0..5.0f64, t in 0.0..11.0f64) {
        let e = cfg();
        let taus = e.time_constants();
        let clock = SimClock::start(&e).unwrap().at(t);
        let scaled = LinearState(x.0.map(|v| k * v));
        let (z, zk) = (zem(&x, &clock, &taus).unwrap(), zem(&scaled, &clock, &taus).unwrap());
        prop_assert!(close(zk.z_it, k * z.z_it, 1e-12));
        prop_assert!(close(zk.z_id, k * z.z_id, 1e-12));
    }

    #[test]
    fn zem_is_constant_without_commands(x in state(), t in 0.0..11.0f64, dt in 1e-3..0.8f64) {
        let e = cfg();
        let taus = e.time_constants();
        let clock = SimClock::start(&e).unwrap();
        let zero = PerPlayer::new(0.0, 0.0, 0.0);
        let later = ExactPropagator::new(&taus, dt).step(&x, &zero);
        let (a, b) = (zem(&x, &clock.at(t), &taus).unwrap(), zem(&later, &clock.at(t + dt), &taus).unwrap());
        prop_assert!(close(a.z_it, b.z_it, 1e-10));
        prop_assert!(close(a.z_id, b.z_id, 1e-10));
    }

    #[test]
    fn zem_changes_at_the_stated_rate(x in state(), u in commands(), t in 0.0..10.0f64) {
        // Integrate the rate with Simpson's rule over one decision period.
        let e = cfg();
        let taus = e.time_constants();
        let clock = SimClock::start(&e).unwrap();
        let dt = 0.1;
        let later = ExactPropagator::new(&taus, dt).step(&x, &u);
        let (a, b) = (zem(&x, &clock.at(t), &taus).unwrap(), zem(&later, &clock.at(t + dt), &taus).unwrap());
        let r = |s: f64| zem_rate(&clock.at(s), &taus, &u);
        let steps = 200;
        let mut int = (0.0, 0.0);
        for k in 0..steps {
            let (s0, s1) = (t + dt * k as f64 / steps as f64, t + dt * (k + 1) as f64 / steps as f64);
            let (p, m, q) = (r(s0), r(0.5 * (s0 + s1)), r(s1));
            int.0 += (s1 - s0) / 6.0 * (p.0 + 4.0 * m.0 + q.0);
            int.1 += (s1 - s0) / 6.0 * (p.1 + 4.0 * m.1 + q.1);
        }
        prop_assert!(close(b.z_it - a.z_it, int.0, 1e-8));
        prop_assert!(close(b.z_id - a.z_id, int.1, 1e-8));
    }
}

#[test]
fn zem_predicts_rk4_terminal_miss() {
    let e = cfg();
    let taus = e.time_constants();
    let clock = SimClock::start(&e).unwrap();
    let zero = PerPlayer::new(0.0, 0.0, 0.0);
    for k in 0..20 {
        let f = k as f64;
        let x = LinearState([40.0 * f - 300.0, 3.0 - f, 250.0 - 30.0 * f, f - 8.0, 60.0 - 6.0 * f, (f * 0.7).sin() * 10.0, 20.0 - 2.0 * f]);
        let z = zem(&x, &clock, &taus).unwrap();
        let at_id = propagate_linear(&x, &zero, &taus, 0.0, clock.t_id, 1e-3);
        let at_it = propagate_linear(&at_id, &zero, &taus, clock.t_id, clock.t_it, 1e-3);
        assert!((at_id.y_id() - z.z_id).abs() <= 1e-6 * z.z_id.abs().max(1.0));
        assert!((at_it.y_it() - z.z_it).abs() <= 1e-6 * z.z_it.abs().max(1.0));
    }
}

#[test]
fn exact_step_agrees_with_rk4() {
    let taus = cfg().time_constants();
    let x = LinearState([10.0, -2.0, -4.0, 1.5, 30.0, -5.0, 12.0]);
    let u = PerPlayer::new(-60.0, 10.0, 20.0);
    let exact = ExactPropagator::new(&taus, 0.1).step(&x, &u);
    let rk4 = propagate_linear(&x, &u, &taus, 0.0, 0.1, 1e-4);
    for i in 0..LinearState::DIM {
        assert!((exact.0[i] - rk4.0[i]).abs() < 1e-9, "slot {i}: {} vs {}", exact.0[i], rk4.0[i]);
    }
}

#[test]
fn evasion_law_matches_small_brute_force() {
    // 2^10 bang-bang sequences over a 1 s horizon against a straight-flying defender.
    let taus = cfg().time_constants();
    let step = ExactPropagator::new(&taus, 0.1);
    let advance = |x: &LinearState, u: f64| step.step(x, &PerPlayer::new(u, 0.0, 0.0));
    for seed in 0..6 {
        let s = seed as f64;
        let x0 = LinearState([0.0, 0.0, 0.4 - 0.2 * s, 0.3 * s - 0.6, 50.0 - 20.0 * s, 0.0, 15.0 - 6.0 * s]);
        let mut best: f64 = 0.0;
        for bits in 0u32..1 << 10 {
            let mut x = x0;
            for k in 0..10 {
                x = advance(&x, if bits >> k & 1 == 1 { 60.0 } else { -60.0 });
            }
            best = best.max(x.y_id().abs());
        }
        let mut x = x0;
        for k in 0..10 {
            let t_go = (10 - k) as f64 * 0.1;
            let z = ZemPair { z_it: 0.0, z_id: zem_single(&x, t_go, &taus, true), t_go_it: t_go, t_go_id: t_go };
            x = advance(&x, sogl_interceptor(&z, 60.0, f64::INFINITY));
        }
        assert!(best - x.y_id().abs() <= 1e-9, "instance {seed}: brute {best} law {}", x.y_id().abs());
    }
}
