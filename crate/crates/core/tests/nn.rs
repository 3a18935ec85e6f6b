use adsim::nn::*;
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spec(rng: &mut ChaCha8Rng) -> NetworkSpec {
    let depth = rng.random_range(0..=2);
    let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(2..=8)).collect();
    NetworkSpec {
        input_dim: rng.random_range(1..=8),
        hidden,
        output_dim: rng.random_range(1..=3),
        head: if rng.random() { Head::Tanh } else { Head::Linear },
        layer_norm: rng.random(),
        output_init_scale: 1.0,
    }
}

fn perturb_norm_params(net: &mut Mlp, rng: &mut ChaCha8Rng) {
    // Move gains and shifts off their (1, 0) init so their gradients are exercised.
    for p in net.params_mut() {
        *p += rng.random_range(-0.2..0.2);
    }
}

#[test]
fn backward_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let spec = random_spec(&mut rng);
        let mut net = Mlp::init(spec.clone(), &mut rng);
        perturb_norm_params(&mut net, &mut rng);
        let batch = rng.random_range(1..=4);
        let x = Array2::from_shape_fn((batch, spec.input_dim), |_| rng.random_range(-2.0..2.0));
        let up = Array2::from_shape_fn((batch, spec.output_dim), |_| rng.random_range(-1.0..1.0));
        let r = check_gradients(&net, x.view(), up.view(), 1e-5, 1e-4);
        assert!(r.checked > 0);
        worst = worst.max(r.max_rel_error);
    }
    assert!(worst <= 1e-5, "worst relative error {worst}");
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let net = Mlp::init(NetworkSpec::actor(13, 2, &[16, 32]), &mut rng);
    let mut opt = Adam::new(net.len(), 3e-4);
    let mut p = net.params().to_vec();
    let g: Vec<f64> = (0..net.len()).map(|i| (i as f64).sin()).collect();
    opt.step(&mut p, &g);
    let net = Mlp::from_params(net.spec().clone(), p).unwrap();
    let ck = Checkpoint { net, optimizer: Some(opt), meta: serde_json::json!({"episode": 7}) };
    let path = dir.path().join("a.ckpt");
    save_checkpoint(&path, &ck).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back, ck);
    let x: Vec<f64> = (0..13).map(|i| i as f64 * 0.1).collect();
    assert_eq!(back.net.forward(&x).unwrap(), ck.net.forward(&x).unwrap());

    let mut bytes = std::fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 3);
    std::fs::write(&path, &bytes).unwrap();
    assert!(load_checkpoint(&path).is_err());
    std::fs::write(&path, b"nonsense").unwrap();
    assert!(load_checkpoint(&path).is_err());
}

#[test]
fn soft_update_is_convex_combination() {
    let spec = NetworkSpec::critic(2, 1, &[3]);
    let mut target = Mlp::zeros(spec.clone());
    let mut source = Mlp::zeros(spec);
    source.params_mut().fill(1.0);
    target.soft_update_from(&source, 5e-3);
    assert!(target.params().iter().enumerate().all(|(i, v)| {
        let before = Mlp::zeros(target.spec().clone()).params()[i];
        *v == 5e-3 + (1.0 - 5e-3) * before
    }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn actor_outputs_strictly_bounded(seed in any::<u64>(), scale in 0.1f64..50.0, xs in prop::collection::vec(-1e3f64..1e3, 13)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Mlp::init(NetworkSpec::actor(13, 2, &[8, 8]), &mut rng);
        for p in net.params_mut() { *p *= scale; }
        let out = net.forward(&xs).unwrap();
        prop_assert!(out.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn forward_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Mlp::init(NetworkSpec::critic(13, 2, &[8, 4]), &mut rng);
        let x: Vec<f64> = (0..15).map(|_| rng.random_range(-1.0..1.0)).collect();
        prop_assert_eq!(net.forward(&x).unwrap(), net.forward(&x).unwrap());
    }
}
