//! Small dense networks with layer normalization, exact reverse-mode
//! gradients and an Adam optimizer. Parameters live in one flat vector.

mod adam;
mod checkpoint;
mod gradcheck;

pub use adam::Adam;
pub use gradcheck::{check_gradients, GradCheck};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};

use ndarray::{Array2, ArrayView2, ArrayViewMut2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

pub const LN_EPS: f64 = 1e-5;
/// Below this variance a layer-norm input is treated as constant and normalizes to zeros.
pub const LN_MIN_VARIANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    Tanh,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub head: Head,
    pub layer_norm: bool,
    /// Scale applied to the initial output-layer weights and biases.
    pub output_init_scale: f64,
}

pub const FULL_HIDDEN: [usize; 3] = [64, 256, 512];

impl NetworkSpec {
    pub fn actor(obs_dim: usize, action_dim: usize, hidden: &[usize]) -> Self {
        Self {
            input_dim: obs_dim,
            hidden: hidden.to_vec(),
            output_dim: action_dim,
            head: Head::Tanh,
            layer_norm: true,
            output_init_scale: 0.01,
        }
    }

    pub fn critic(obs_dim: usize, action_dim: usize, hidden: &[usize]) -> Self {
        Self {
            input_dim: obs_dim + action_dim,
            hidden: hidden.to_vec(),
            output_dim: 1,
            head: Head::Linear,
            layer_norm: true,
            output_init_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.contains(&0) {
            return Err("network dimensions must be positive".into());
        }
        if !(self.output_init_scale.is_finite() && self.output_init_scale >= 0.0) {
            return Err("output_init_scale must be finite and >= 0".into());
        }
        Ok(())
    }

    fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.input_dim];
        w.extend(&self.hidden);
        w.push(self.output_dim);
        w
    }

    fn layout(&self) -> (Vec<Layer>, usize) {
        let widths = self.widths();
        let mut layers = Vec::new();
        let mut off = 0;
        for (i, pair) in widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let hidden = i + 2 < widths.len();
            let norm = hidden && self.layer_norm;
            let weight = off;
            let bias = weight + fan_in * fan_out;
            off = bias + fan_out;
            let (gain, shift) = if norm {
                let g = off;
                off += 2 * fan_out;
                (g, g + fan_out)
            } else {
                (0, 0)
            };
            layers.push(Layer { fan_in, fan_out, weight, bias, gain, shift, norm, hidden });
        }
        (layers, off)
    }

    pub fn param_count(&self) -> usize {
        self.layout().1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Layer {
    fan_in: usize,
    fan_out: usize,
    weight: usize,
    bias: usize,
    gain: usize,
    shift: usize,
    norm: bool,
    hidden: bool,
}

/// Feed-forward network: hidden layers are dense → layer norm → ReLU; the
/// output layer is dense followed by the head.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    spec: NetworkSpec,
    layers: Vec<Layer>,
    params: Vec<f64>,
}

/// Activations kept by a batched forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct Cache {
    input: Array2<f64>,
    /// Per layer: normalized pre-activation (or raw when not normalized),
    /// the inverse std per row, and the layer output.
    normalized: Vec<Array2<f64>>,
    inv_std: Vec<Vec<f64>>,
    outputs: Vec<Array2<f64>>,
}

impl Cache {
    pub fn output(&self) -> &Array2<f64> {
        self.outputs.last().expect("at least one layer")
    }
}

impl Mlp {
    /// Network with all parameters zero except layer-norm gains (one).
    pub fn zeros(spec: NetworkSpec) -> Self {
        let (layers, n) = spec.layout();
        let mut params = vec![0.0; n];
        for l in layers.iter().filter(|l| l.norm) {
            params[l.gain..l.gain + l.fan_out].fill(1.0);
        }
        Self { spec, layers, params }
    }

    /// Weights and biases uniform in ±1/√fan_in, the output layer further
    /// scaled by `output_init_scale`.
    pub fn init<R: Rng + ?Sized>(spec: NetworkSpec, rng: &mut R) -> Self {
        let mut net = Self::zeros(spec);
        let last = net.layers.len() - 1;
        for (i, l) in net.layers.clone().iter().enumerate() {
            let bound = 1.0 / (l.fan_in as f64).sqrt();
            let scale = if i == last { net.spec.output_init_scale } else { 1.0 };
            for p in &mut net.params[l.weight..l.bias + l.fan_out] {
                *p = scale * rng.random_range(-bound..bound);
            }
        }
        net
    }

    pub fn from_params(spec: NetworkSpec, params: Vec<f64>) -> Result<Self, SimError> {
        let mut net = Self::zeros(spec);
        if params.len() != net.params.len() {
            return Err(SimError::Dimension { expected: net.params.len(), got: params.len() });
        }
        net.params = params;
        Ok(net)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    fn weight(&self, l: &Layer) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape((l.fan_in, l.fan_out), &self.params[l.weight..l.bias]).expect("layout")
    }

    /// Single-sample inference without caching.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, SimError> {
        if x.len() != self.spec.input_dim {
            return Err(SimError::Dimension { expected: self.spec.input_dim, got: x.len() });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for l in &self.layers {
            next.clear();
            next.extend_from_slice(&self.params[l.bias..l.bias + l.fan_out]);
            let w = &self.params[l.weight..l.bias];
            for (i, xi) in cur.iter().enumerate() {
                if *xi != 0.0 {
                    let row = &w[i * l.fan_out..(i + 1) * l.fan_out];
                    for (n, wij) in next.iter_mut().zip(row) {
                        *n += xi * wij;
                    }
                }
            }
            if l.hidden {
                if l.norm {
                    layer_norm_in_place(&mut next);
                    let gain = &self.params[l.gain..l.gain + l.fan_out];
                    let shift = &self.params[l.shift..l.shift + l.fan_out];
                    for ((v, g), b) in next.iter_mut().zip(gain).zip(shift) {
                        *v = g * *v + b;
                    }
                }
                for v in next.iter_mut() {
                    *v = v.max(0.0);
                }
            } else if self.spec.head == Head::Tanh {
                for v in next.iter_mut() {
                    *v = v.tanh();
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Batched forward pass (rows are samples) keeping activations.
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Result<Cache, SimError> {
        if x.ncols() != self.spec.input_dim {
            return Err(SimError::Dimension { expected: self.spec.input_dim, got: x.ncols() });
        }
        let mut cache = Cache {
            input: x.to_owned(),
            normalized: Vec::with_capacity(self.layers.len()),
            inv_std: Vec::with_capacity(self.layers.len()),
            outputs: Vec::with_capacity(self.layers.len()),
        };
        for l in &self.layers {
            let prev = cache.outputs.last().unwrap_or(&cache.input);
            let mut z = prev.dot(&self.weight(l)).as_standard_layout().into_owned();
            let b = ndarray::ArrayView1::from(&self.params[l.bias..l.bias + l.fan_out]);
            z += &b;
            let mut inv_std = Vec::new();
            let out = if l.hidden {
                let mut out = z.clone();
                if l.norm {
                    let gain = &self.params[l.gain..l.gain + l.fan_out];
                    let shift = &self.params[l.shift..l.shift + l.fan_out];
                    for (mut zrow, mut orow) in z.rows_mut().into_iter().zip(out.rows_mut()) {
                        let zs = zrow.as_slice_mut().expect("standard layout");
                        let inv = layer_norm_in_place(zs);
                        inv_std.push(inv.unwrap_or(0.0));
                        for (((o, n), g), s) in orow.iter_mut().zip(zs.iter()).zip(gain).zip(shift) {
                            *o = (g * n + s).max(0.0);
                        }
                    }
                } else {
                    out.mapv_inplace(|v| v.max(0.0));
                }
                out
            } else if self.spec.head == Head::Tanh {
                z.mapv(f64::tanh)
            } else {
                z.clone()
            };
            cache.normalized.push(z);
            cache.inv_std.push(inv_std);
            cache.outputs.push(out);
        }
        Ok(cache)
    }

    /// Reverse pass: accumulates into `grad` (same layout as the parameters)
    /// the batch sum of `upstream`-weighted output gradients and returns the
    /// gradient with respect to the input.
    pub fn backward(&self, cache: &Cache, upstream: ArrayView2<'_, f64>, grad: &mut [f64]) -> Array2<f64> {
        assert_eq!(grad.len(), self.params.len(), "gradient buffer size");
        let last = self.layers.len() - 1;
        let mut delta = upstream.as_standard_layout().into_owned();
        if self.spec.head == Head::Tanh {
            delta.zip_mut_with(&cache.outputs[last], |d, y| *d *= 1.0 - y * y);
        }
        for (i, l) in self.layers.iter().enumerate().rev() {
            if l.hidden {
                // ReLU then layer-norm affine then normalization.
                let out = &cache.outputs[i];
                delta.zip_mut_with(out, |d, o| {
                    if *o <= 0.0 {
                        *d = 0.0
                    }
                });
                if l.norm {
                    let n = &cache.normalized[i];
                    let (gain_grad, rest) = grad[l.gain..].split_at_mut(l.fan_out);
                    let shift_grad = &mut rest[..l.fan_out];
                    let gain = &self.params[l.gain..l.gain + l.fan_out];
                    for (r, (mut drow, nrow)) in delta.rows_mut().into_iter().zip(n.rows()).enumerate() {
                        let inv = cache.inv_std[i][r];
                        let ds = drow.as_slice_mut().expect("standard layout");
                        let ns = nrow.as_slice().expect("standard layout");
                        let mut mean_dn = 0.0;
                        let mut mean_dn_n = 0.0;
                        for j in 0..l.fan_out {
                            shift_grad[j] += ds[j];
                            if inv > 0.0 {
                                gain_grad[j] += ds[j] * ns[j];
                            }
                            let dn = ds[j] * gain[j];
                            ds[j] = dn;
                            mean_dn += dn;
                            mean_dn_n += dn * ns[j];
                        }
                        let k = l.fan_out as f64;
                        mean_dn /= k;
                        mean_dn_n /= k;
                        for j in 0..l.fan_out {
                            ds[j] = if inv > 0.0 { inv * (ds[j] - mean_dn - ns[j] * mean_dn_n) } else { 0.0 };
                        }
                    }
                }
            }
            let prev = if i == 0 { &cache.input } else { &cache.outputs[i - 1] };
            let mut gw = ArrayViewMut2::from_shape((l.fan_in, l.fan_out), &mut grad[l.weight..l.bias]).expect("layout");
            ndarray::linalg::general_mat_mul(1.0, &prev.t(), &delta, 1.0, &mut gw);
            for (gb, s) in grad[l.bias..l.bias + l.fan_out].iter_mut().zip(delta.sum_axis(Axis(0))) {
                *gb += s;
            }
            delta = delta.dot(&self.weight(l).t()).as_standard_layout().into_owned();
        }
        delta
    }

    /// `self ← κ·source + (1−κ)·self`, element-wise.
    pub fn soft_update_from(&mut self, source: &Mlp, kappa: f64) {
        assert_eq!(self.params.len(), source.params.len(), "soft update shape");
        for (t, s) in self.params.iter_mut().zip(&source.params) {
            *t = kappa * s + (1.0 - kappa) * *t;
        }
    }
}

/// Normalizes `v` in place to zero mean and unit variance; returns the
/// inverse standard deviation, or `None` (and zeros) for constant input.
fn layer_norm_in_place(v: &mut [f64]) -> Option<f64> {
    let k = v.len() as f64;
    let mean = v.iter().sum::<f64>() / k;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / k;
    if var < LN_MIN_VARIANCE {
        v.fill(0.0);
        return None;
    }
    let inv = 1.0 / (var + LN_EPS).sqrt();
    for x in v.iter_mut() {
        *x = (*x - mean) * inv;
    }
    Some(inv)
}
