use ndarray::{Array2, ArrayView2};

use super::Mlp;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    /// Largest `|analytic − numeric| / max(|analytic|, |numeric|, floor)`.
    pub max_rel_error: f64,
    pub checked: usize,
    /// Coordinates skipped because the probe straddled a ReLU kink.
    pub skipped: usize,
}

/// Compares `backward` against central differences of
/// `L(p) = Σ upstream ⊙ forward(p, x)` for every parameter and every input.
pub fn check_gradients(net: &Mlp, x: ArrayView2<'_, f64>, upstream: ArrayView2<'_, f64>, h: f64, floor: f64) -> GradCheck {
    let loss = |n: &Mlp, x: ArrayView2<'_, f64>| -> f64 {
        let c = n.forward_batch(x).expect("dimensions");
        (c.output() * &upstream).sum()
    };
    let cache = net.forward_batch(x).expect("dimensions");
    let mut grad = vec![0.0; net.len()];
    let grad_in = net.backward(&cache, upstream, &mut grad);
    let mut report = GradCheck { max_rel_error: 0.0, checked: 0, skipped: 0 };
    let base = loss(net, x);
    let mut judge = |analytic: f64, plus: f64, minus: f64| {
        let fwd = (plus - base) / h;
        let bwd = (base - minus) / h;
        let scale = fwd.abs().max(bwd.abs()).max(floor);
        if (fwd - bwd).abs() > 1e-3 * scale {
            report.skipped += 1;
            return;
        }
        let numeric = (plus - minus) / (2.0 * h);
        let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor);
        report.max_rel_error = report.max_rel_error.max(err);
        report.checked += 1;
    };
    let mut probe = net.clone();
    for (i, &analytic) in grad.iter().enumerate() {
        let p0 = net.params()[i];
        probe.params_mut()[i] = p0 + h;
        let plus = loss(&probe, x);
        probe.params_mut()[i] = p0 - h;
        let minus = loss(&probe, x);
        probe.params_mut()[i] = p0;
        judge(analytic, plus, minus);
    }
    let mut xp: Array2<f64> = x.to_owned();
    for idx in 0..xp.len() {
        let (r, c) = (idx / xp.ncols(), idx % xp.ncols());
        let x0 = xp[[r, c]];
        xp[[r, c]] = x0 + h;
        let plus = loss(net, xp.view());
        xp[[r, c]] = x0 - h;
        let minus = loss(net, xp.view());
        xp[[r, c]] = x0;
        judge(grad_in[[r, c]], plus, minus);
    }
    report
}
