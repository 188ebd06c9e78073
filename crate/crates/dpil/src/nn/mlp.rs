//! Dense feed-forward network with exact analytic gradients.
//!
//! A layer computes `o = dropout(act(batchnorm(W x + b)))`, where batch norm
//! and dropout are optional. Dropout is the inverted kind (activations are
//! scaled by `1/(1-p)` at train time), so eval mode is the identity. Batch
//! norm uses batch statistics in train mode and frozen running statistics in
//! eval mode; gradients in train mode include the coupling through the batch
//! mean and variance.
//!
//! All parameters live in `f64`; gradients are checked against central finite
//! differences in the test suite.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::activation::Activation;

pub const BATCH_NORM_EPS: f64 = 1e-5;
pub const BATCH_NORM_MOMENTUM: f64 = 0.9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchNorm {
    pub gamma: Vec<f64>,
    pub shift: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
}

impl BatchNorm {
    fn new(dim: usize) -> Self {
        BatchNorm {
            gamma: vec![1.0; dim],
            shift: vec![0.0; dim],
            running_mean: vec![0.0; dim],
            running_var: vec![1.0; dim],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `(out_dim, in_dim)`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
    pub batch_norm: Option<BatchNorm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Layer>,
    dropout_rate: f64,
}

/// Describes one layer of an [`Mlp`] to build.
#[derive(Debug, Clone)]
pub struct LayerSpec {
    pub out_dim: usize,
    pub activation: Activation,
    pub batch_norm: bool,
}

impl LayerSpec {
    pub fn plain(out_dim: usize, activation: Activation) -> Self {
        LayerSpec {
            out_dim,
            activation,
            batch_norm: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Pre-sampled dropout masks for one batch: `masks[sample][layer][unit]`.
/// Dropout applies to every layer output except the last.
#[derive(Debug, Clone)]
pub struct DropoutPlan {
    masks: Vec<Vec<Vec<bool>>>,
}

/// Per-layer batch statistics observed during a train-mode forward pass.
/// Feed back through [`Mlp::update_running_stats`] to advance the running
/// mean/var used by eval mode.
#[derive(Debug, Clone)]
pub struct BatchStats {
    per_layer: Vec<Option<(Vec<f64>, Vec<f64>)>>,
}

/// Flat parameter-shaped gradient set, aligned with [`Mlp::params_flat`].
#[derive(Debug, Clone)]
pub struct Gradients(pub Vec<f64>);

struct LayerCache {
    /// Pre-activation z = Wx + b, per sample.
    z: Vec<Vec<f64>>,
    /// Normalized zhat (batch norm only), per sample.
    zhat: Vec<Vec<f64>>,
    /// Post-activation, pre-dropout, per sample.
    y: Vec<Vec<f64>>,
    /// Layer output (after dropout), per sample.
    o: Vec<Vec<f64>>,
    /// Batch variance used (train-mode batch norm only).
    var: Vec<f64>,
}

impl Mlp {
    /// Builds a network with weights and biases drawn uniformly from
    /// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`. `dropout_rate` applies to all
    /// layer outputs but the last.
    pub fn new(
        in_dim: usize,
        layers: &[LayerSpec],
        dropout_rate: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if in_dim == 0 || layers.is_empty() {
            return Err(Error::rejected("mlp needs in_dim > 0 and >= 1 layer"));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::rejected(format!(
                "dropout_rate must be in [0, 1), got {dropout_rate}"
            )));
        }
        let mut built = Vec::with_capacity(layers.len());
        let mut prev = in_dim;
        for spec in layers {
            if spec.out_dim == 0 {
                return Err(Error::rejected("layer out_dim must be > 0"));
            }
            let limit = 1.0 / (prev as f64).sqrt();
            let weights = (0..prev * spec.out_dim)
                .map(|_| rng.gen_range(-limit..=limit))
                .collect();
            let bias = (0..spec.out_dim)
                .map(|_| rng.gen_range(-limit..=limit))
                .collect();
            built.push(Layer {
                in_dim: prev,
                out_dim: spec.out_dim,
                weights,
                bias,
                activation: spec.activation,
                batch_norm: spec.batch_norm.then(|| BatchNorm::new(spec.out_dim)),
            });
            prev = spec.out_dim;
        }
        Ok(Mlp {
            layers: built,
            dropout_rate,
        })
    }

    /// Builds a network from explicit weights and biases; used by tests and
    /// checkpoint loading. `weights[k]` is row-major `(out, in)`.
    pub fn from_params(
        in_dim: usize,
        layers: &[LayerSpec],
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let mut rng = crate::seed::rng_from_seed(0);
        let mut net = Mlp::new(in_dim, layers, 0.0, &mut rng)?;
        if weights.len() != net.layers.len() || biases.len() != net.layers.len() {
            return Err(Error::rejected("one weight/bias set per layer required"));
        }
        for (k, layer) in net.layers.iter_mut().enumerate() {
            if weights[k].len() != layer.weights.len() {
                return Err(Error::dim(
                    format!("layer {k} weights"),
                    layer.weights.len(),
                    weights[k].len(),
                ));
            }
            if biases[k].len() != layer.bias.len() {
                return Err(Error::dim(
                    format!("layer {k} bias"),
                    layer.bias.len(),
                    biases[k].len(),
                ));
            }
            layer.weights = weights[k].clone();
            layer.bias = biases[k].clone();
        }
        Ok(net)
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.in_dim()];
        dims.extend(self.layers.iter().map(|l| l.out_dim));
        dims
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.in_dim() {
            return Err(Error::dim("mlp input", self.in_dim(), x.len()));
        }
        Ok(())
    }

    /// Eval-mode forward pass: deterministic, no dropout, batch norm frozen
    /// to its running statistics.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        for layer in &self.layers {
            let mut z = affine(layer, &cur);
            if let Some(bn) = &layer.batch_norm {
                for (d, v) in z.iter_mut().enumerate() {
                    let zhat = (*v - bn.running_mean[d]) / (bn.running_var[d] + BATCH_NORM_EPS).sqrt();
                    *v = bn.gamma[d] * zhat + bn.shift[d];
                }
            }
            for v in z.iter_mut() {
                *v = layer.activation.forward(*v);
            }
            cur = z;
        }
        Ok(cur)
    }

    /// Train-mode forward pass on a single input. Batch norm sees a batch of
    /// one; dropout masks are drawn from `rng`.
    pub fn apply_train(&self, x: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let batch = [x.to_vec()];
        let plan = self.sample_dropout_plan(1, rng);
        let (outs, _, _) = self.forward_batch(&batch, Mode::Train, Some(&plan))?;
        Ok(outs.into_iter().next().unwrap())
    }

    /// Draws dropout masks for a batch; a no-op plan when dropout is disabled.
    pub fn sample_dropout_plan(&self, batch: usize, rng: &mut ChaCha8Rng) -> DropoutPlan {
        let p = self.dropout_rate;
        let masks = (0..batch)
            .map(|_| {
                self.layers
                    .iter()
                    .enumerate()
                    .map(|(k, layer)| {
                        let last = k + 1 == self.layers.len();
                        if p > 0.0 && !last {
                            (0..layer.out_dim).map(|_| rng.gen::<f64>() >= p).collect()
                        } else {
                            Vec::new()
                        }
                    })
                    .collect()
            })
            .collect();
        DropoutPlan { masks }
    }

    fn forward_batch(
        &self,
        inputs: &[Vec<f64>],
        mode: Mode,
        plan: Option<&DropoutPlan>,
    ) -> Result<(Vec<Vec<f64>>, Vec<LayerCache>, BatchStats)> {
        let n = inputs.len();
        for x in inputs {
            self.check_input(x)?;
        }
        if mode == Mode::Train && self.dropout_rate > 0.0 && plan.is_none() {
            return Err(Error::rejected(
                "train-mode forward with dropout requires a DropoutPlan",
            ));
        }
        let keep_scale = 1.0 / (1.0 - self.dropout_rate);
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut stats = Vec::with_capacity(self.layers.len());
        let mut cur: Vec<Vec<f64>> = inputs.to_vec();

        for (k, layer) in self.layers.iter().enumerate() {
            let z: Vec<Vec<f64>> = cur.iter().map(|x| affine(layer, x)).collect();
            let mut var = Vec::new();
            let zhat;
            let pre_act: Vec<Vec<f64>>;
            if let Some(bn) = &layer.batch_norm {
                let (m, v) = match mode {
                    Mode::Train => batch_mean_var(&z, layer.out_dim),
                    Mode::Eval => (bn.running_mean.clone(), bn.running_var.clone()),
                };
                let mut zh = vec![vec![0.0; layer.out_dim]; n];
                let mut out = vec![vec![0.0; layer.out_dim]; n];
                for b in 0..n {
                    for d in 0..layer.out_dim {
                        let h = (z[b][d] - m[d]) / (v[d] + BATCH_NORM_EPS).sqrt();
                        zh[b][d] = h;
                        out[b][d] = bn.gamma[d] * h + bn.shift[d];
                    }
                }
                if mode == Mode::Train {
                    stats.push(Some((m, v.clone())));
                } else {
                    stats.push(None);
                }
                var = v;
                zhat = zh;
                pre_act = out;
            } else {
                stats.push(None);
                zhat = Vec::new();
                pre_act = z.clone();
            }

            let y: Vec<Vec<f64>> = pre_act
                .iter()
                .map(|row| row.iter().map(|&v| layer.activation.forward(v)).collect())
                .collect();

            let last = k + 1 == self.layers.len();
            let o: Vec<Vec<f64>> = if mode == Mode::Train && self.dropout_rate > 0.0 && !last {
                let plan = plan.unwrap();
                y.iter()
                    .enumerate()
                    .map(|(b, row)| {
                        row.iter()
                            .zip(&plan.masks[b][k])
                            .map(|(&v, &keep)| if keep { v * keep_scale } else { 0.0 })
                            .collect()
                    })
                    .collect()
            } else {
                y.clone()
            };

            caches.push(LayerCache {
                z,
                zhat,
                y,
                o: o.clone(),
                var,
            });
            cur = o;
        }
        Ok((cur, caches, BatchStats { per_layer: stats }))
    }

    /// Computes the mean per-sample loss over `inputs` and its exact gradient
    /// with respect to every parameter. `loss_fn(idx, output)` returns the
    /// per-sample loss and its gradient w.r.t. the network output.
    ///
    /// Train mode uses batch-norm batch statistics and the dropout masks in
    /// `plan`; eval mode is the deterministic frozen pass. The returned
    /// [`BatchStats`] carries the batch-norm statistics observed so training
    /// loops can advance the running averages.
    pub fn batch_gradient<F>(
        &self,
        inputs: &[Vec<f64>],
        loss_fn: F,
        mode: Mode,
        plan: Option<&DropoutPlan>,
    ) -> Result<(f64, Gradients, BatchStats)>
    where
        F: Fn(usize, &[f64]) -> (f64, Vec<f64>),
    {
        if inputs.is_empty() {
            return Err(Error::rejected("batch_gradient requires a non-empty batch"));
        }
        let n = inputs.len();
        let (outputs, caches, stats) = self.forward_batch(inputs, mode, plan)?;

        let mut total_loss = 0.0;
        // dL/d(output) per sample, scaled by 1/n so gradients are of the mean loss.
        let mut d_out: Vec<Vec<f64>> = Vec::with_capacity(n);
        for (b, out) in outputs.iter().enumerate() {
            let (loss, grad) = loss_fn(b, out);
            if !loss.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite loss at batch index {b}"
                )));
            }
            if grad.len() != self.out_dim() {
                return Err(Error::dim("loss gradient", self.out_dim(), grad.len()));
            }
            total_loss += loss;
            d_out.push(grad.iter().map(|g| g / n as f64).collect());
        }
        total_loss /= n as f64;

        let mut grads = vec![0.0; self.param_count()];
        let mut offset_end = grads.len();
        let keep_scale = 1.0 / (1.0 - self.dropout_rate);

        // Backward, last layer first.
        let mut d_cur = d_out;
        for (k, layer) in self.layers.iter().enumerate().rev() {
            let cache = &caches[k];
            let last = k + 1 == self.layers.len();
            let layer_inputs: Vec<&[f64]> = if k == 0 {
                inputs.iter().map(|x| x.as_slice()).collect()
            } else {
                caches[k - 1].o.iter().map(|x| x.as_slice()).collect()
            };

            // Through dropout.
            let d_y: Vec<Vec<f64>> = if mode == Mode::Train && self.dropout_rate > 0.0 && !last {
                let plan = plan.unwrap();
                d_cur
                    .iter()
                    .enumerate()
                    .map(|(b, row)| {
                        row.iter()
                            .zip(&plan.masks[b][k])
                            .map(|(&g, &keep)| if keep { g * keep_scale } else { 0.0 })
                            .collect()
                    })
                    .collect()
            } else {
                d_cur
            };

            // Through the activation.
            let d_pre: Vec<Vec<f64>> = d_y
                .iter()
                .zip(&cache.y)
                .map(|(grow, yrow)| {
                    grow.iter()
                        .zip(yrow)
                        .map(|(&g, &y)| g * layer.activation.grad_from_output(y))
                        .collect()
                })
                .collect();

            // Through batch norm (if present) down to z.
            let (d_z, d_gamma, d_shift) = if let Some(bn) = &layer.batch_norm {
                backward_batch_norm(bn, cache, &d_pre, mode)
            } else {
                (d_pre, Vec::new(), Vec::new())
            };

            // Parameter gradients for this layer, then pass to inputs.
            let pc = layer_param_count(layer);
            let base = offset_end - pc;
            let (w_slice, rest) = grads[base..offset_end].split_at_mut(layer.in_dim * layer.out_dim);
            let (b_slice, bn_slice) = rest.split_at_mut(layer.out_dim);
            let mut d_in = vec![vec![0.0; layer.in_dim]; n];
            for b in 0..n {
                let x = layer_inputs[b];
                for d in 0..layer.out_dim {
                    let g = d_z[b][d];
                    b_slice[d] += g;
                    let row = d * layer.in_dim;
                    for i in 0..layer.in_dim {
                        w_slice[row + i] += g * x[i];
                        d_in[b][i] += layer.weights[row + i] * g;
                    }
                }
            }
            if layer.batch_norm.is_some() {
                let (g_slice, s_slice) = bn_slice.split_at_mut(layer.out_dim);
                g_slice.copy_from_slice(&d_gamma);
                s_slice.copy_from_slice(&d_shift);
            }
            offset_end = base;
            d_cur = d_in;
        }
        debug_assert_eq!(offset_end, 0);
        Ok((total_loss, Gradients(grads), stats))
    }

    /// Evaluates the mean loss without gradients; used by finite-difference
    /// checks. Same semantics as [`Mlp::batch_gradient`].
    pub fn batch_loss<F>(
        &self,
        inputs: &[Vec<f64>],
        loss_fn: F,
        mode: Mode,
        plan: Option<&DropoutPlan>,
    ) -> Result<f64>
    where
        F: Fn(usize, &[f64]) -> f64,
    {
        let (outputs, _, _) = self.forward_batch(inputs, mode, plan)?;
        let n = outputs.len() as f64;
        Ok(outputs
            .iter()
            .enumerate()
            .map(|(b, out)| loss_fn(b, out))
            .sum::<f64>()
            / n)
    }

    /// Advances batch-norm running statistics with momentum
    /// [`BATCH_NORM_MOMENTUM`] using the batch statistics of a train pass.
    pub fn update_running_stats(&mut self, stats: &BatchStats) {
        for (layer, st) in self.layers.iter_mut().zip(&stats.per_layer) {
            if let (Some(bn), Some((mean, var))) = (layer.batch_norm.as_mut(), st.as_ref()) {
                for d in 0..bn.running_mean.len() {
                    bn.running_mean[d] =
                        BATCH_NORM_MOMENTUM * bn.running_mean[d] + (1.0 - BATCH_NORM_MOMENTUM) * mean[d];
                    bn.running_var[d] =
                        BATCH_NORM_MOMENTUM * bn.running_var[d] + (1.0 - BATCH_NORM_MOMENTUM) * var[d];
                }
            }
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(layer_param_count).sum()
    }

    /// Parameters flattened layer by layer: weights, bias, then batch-norm
    /// gamma and shift when present. Running statistics are not parameters.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.bias);
            if let Some(bn) = &layer.batch_norm {
                out.extend_from_slice(&bn.gamma);
                out.extend_from_slice(&bn.shift);
            }
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::dim("params", self.param_count(), params.len()));
        }
        let mut at = 0;
        for layer in &mut self.layers {
            let w = layer.weights.len();
            layer.weights.copy_from_slice(&params[at..at + w]);
            at += w;
            let b = layer.bias.len();
            layer.bias.copy_from_slice(&params[at..at + b]);
            at += b;
            if let Some(bn) = &mut layer.batch_norm {
                let d = bn.gamma.len();
                bn.gamma.copy_from_slice(&params[at..at + d]);
                at += d;
                bn.shift.copy_from_slice(&params[at..at + d]);
                at += d;
            }
        }
        Ok(())
    }
}

fn affine(layer: &Layer, x: &[f64]) -> Vec<f64> {
    let mut out = layer.bias.clone();
    for (d, o) in out.iter_mut().enumerate() {
        let row = d * layer.in_dim;
        for (i, &xi) in x.iter().enumerate() {
            *o += layer.weights[row + i] * xi;
        }
    }
    out
}

fn layer_param_count(layer: &Layer) -> usize {
    let mut n = layer.weights.len() + layer.bias.len();
    if layer.batch_norm.is_some() {
        n += 2 * layer.out_dim;
    }
    n
}

fn batch_mean_var(z: &[Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = z.len() as f64;
    let mut mean = vec![0.0; dim];
    for row in z {
        for (d, &v) in row.iter().enumerate() {
            mean[d] += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut var = vec![0.0; dim];
    for row in z {
        for (d, &v) in row.iter().enumerate() {
            let c = v - mean[d];
            var[d] += c * c;
        }
    }
    for v in var.iter_mut() {
        *v /= n;
    }
    (mean, var)
}

/// Backprop through batch norm. Returns (d_z, d_gamma, d_shift).
/// Train mode differentiates through the batch mean and variance; eval mode
/// treats the running statistics as constants.
fn backward_batch_norm(
    bn: &BatchNorm,
    cache: &LayerCache,
    d_out: &[Vec<f64>],
    mode: Mode,
) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let n = d_out.len();
    let dim = bn.gamma.len();
    let mut d_gamma = vec![0.0; dim];
    let mut d_shift = vec![0.0; dim];
    let mut d_z = vec![vec![0.0; dim]; n];

    match mode {
        Mode::Eval => {
            for b in 0..n {
                for d in 0..dim {
                    let inv_std = 1.0 / (bn.running_var[d] + BATCH_NORM_EPS).sqrt();
                    let zhat = (cache.z[b][d] - bn.running_mean[d]) * inv_std;
                    d_gamma[d] += d_out[b][d] * zhat;
                    d_shift[d] += d_out[b][d];
                    d_z[b][d] = d_out[b][d] * bn.gamma[d] * inv_std;
                }
            }
        }
        Mode::Train => {
            let nf = n as f64;
            for d in 0..dim {
                let inv_std = 1.0 / (cache.var[d] + BATCH_NORM_EPS).sqrt();
                let mut sum_dy = 0.0;
                let mut sum_dy_zhat = 0.0;
                for b in 0..n {
                    let dy = d_out[b][d];
                    sum_dy += dy;
                    sum_dy_zhat += dy * cache.zhat[b][d];
                    d_gamma[d] += dy * cache.zhat[b][d];
                    d_shift[d] += dy;
                }
                for b in 0..n {
                    let dy = d_out[b][d];
                    d_z[b][d] = bn.gamma[d] * inv_std / nf
                        * (nf * dy - sum_dy - cache.zhat[b][d] * sum_dy_zhat);
                }
            }
        }
    }
    (d_z, d_gamma, d_shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn mse_loss<'a>(targets: &'a [Vec<f64>]) -> impl Fn(usize, &[f64]) -> (f64, Vec<f64>) + 'a {
        move |b, out| {
            let t = &targets[b];
            let mut loss = 0.0;
            let mut grad = Vec::with_capacity(out.len());
            for (o, &tv) in out.iter().zip(t) {
                let d = o - tv;
                loss += d * d;
                grad.push(2.0 * d);
            }
            (loss, grad)
        }
    }

    #[test]
    fn identity_layer_is_identity_map() {
        let net = Mlp::from_params(
            2,
            &[LayerSpec::plain(2, Activation::Identity)],
            vec![vec![1.0, 0.0, 0.0, 1.0]],
            vec![vec![0.0, 0.0]],
        )
        .unwrap();
        assert_eq!(net.apply(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn affine_layer_hand_case() {
        // W = [[2, 0], [0, 3]], b = [1, -1], x = [1, 1] -> [3, 2].
        let net = Mlp::from_params(
            2,
            &[LayerSpec::plain(2, Activation::Identity)],
            vec![vec![2.0, 0.0, 0.0, 3.0]],
            vec![vec![1.0, -1.0]],
        )
        .unwrap();
        assert_eq!(net.apply(&[1.0, 1.0]).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn relu_clamps_negatives() {
        let net = Mlp::from_params(
            2,
            &[LayerSpec::plain(2, Activation::Relu)],
            vec![vec![1.0, 0.0, 0.0, 1.0]],
            vec![vec![0.0, 0.0]],
        )
        .unwrap();
        assert_eq!(net.apply(&[-5.0, 4.0]).unwrap(), vec![0.0, 4.0]);
    }

    #[test]
    fn input_dim_mismatch_rejected() {
        let mut rng = rng_from_seed(0);
        let net = Mlp::new(3, &[LayerSpec::plain(2, Activation::Tanh)], 0.0, &mut rng).unwrap();
        assert!(net.apply(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn eval_mode_is_pure() {
        let mut rng = rng_from_seed(9);
        let net = Mlp::new(
            4,
            &[
                LayerSpec {
                    out_dim: 6,
                    activation: Activation::Relu,
                    batch_norm: true,
                },
                LayerSpec::plain(2, Activation::Identity),
            ],
            0.3,
            &mut rng,
        )
        .unwrap();
        let x = [0.3, -0.8, 1.2, 0.05];
        let a = net.apply(&x).unwrap();
        let b = net.apply(&x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn seeded_construction_is_deterministic() {
        let spec = [
            LayerSpec::plain(5, Activation::Tanh),
            LayerSpec::plain(3, Activation::Identity),
        ];
        let a = Mlp::new(4, &spec, 0.0, &mut rng_from_seed(11)).unwrap();
        let b = Mlp::new(4, &spec, 0.0, &mut rng_from_seed(11)).unwrap();
        assert_eq!(a.params_flat(), b.params_flat());
    }

    #[test]
    fn single_weight_chain_rule_hand_case() {
        // y = w x with w = 3, x = 1, loss = y^2: dL/dw = 2 w x^2 = 6.
        let net = Mlp::from_params(
            1,
            &[LayerSpec::plain(1, Activation::Identity)],
            vec![vec![3.0]],
            vec![vec![0.0]],
        )
        .unwrap();
        let targets = vec![vec![0.0]];
        let (loss, grads, _) = net
            .batch_gradient(&[vec![1.0]], mse_loss(&targets), Mode::Eval, None)
            .unwrap();
        assert!((loss - 9.0).abs() < 1e-12);
        assert!((grads.0[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_net_has_zero_gradients() {
        // All-zero weights and biases with loss = |out|^2: the forward output
        // is 0, so every gradient is 0.
        let net = Mlp::from_params(
            3,
            &[
                LayerSpec::plain(4, Activation::Tanh),
                LayerSpec::plain(2, Activation::Identity),
            ],
            vec![vec![0.0; 12], vec![0.0; 8]],
            vec![vec![0.0; 4], vec![0.0; 2]],
        )
        .unwrap();
        let targets = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let (_, grads, _) = net
            .batch_gradient(
                &[vec![0.5, -1.0, 2.0], vec![0.1, 0.2, 0.3]],
                mse_loss(&targets),
                Mode::Eval,
                None,
            )
            .unwrap();
        assert!(grads.0.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn non_finite_loss_reports_batch_index() {
        let mut rng = rng_from_seed(1);
        let net = Mlp::new(1, &[LayerSpec::plain(1, Activation::Identity)], 0.0, &mut rng).unwrap();
        let err = net
            .batch_gradient(
                &[vec![0.0], vec![1.0]],
                |b, _out| {
                    if b == 1 {
                        (f64::NAN, vec![0.0])
                    } else {
                        (0.0, vec![0.0])
                    }
                },
                Mode::Eval,
                None,
            )
            .unwrap_err();
        assert!(err.to_string().contains("index 1"), "{err}");
    }

    /// Random small net in the spec's gradient-check family: up to 3 layers,
    /// up to 8 units, mixed activations, optional batch norm and dropout.
    fn random_net(seed: u64) -> (Mlp, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let n_layers = rng.gen_range(1..=3);
        let in_dim = rng.gen_range(1..=8);
        let mut dims = vec![in_dim];
        let mut specs = Vec::new();
        for k in 0..n_layers {
            let out = rng.gen_range(1..=8);
            let act = match rng.gen_range(0..3) {
                0 => Activation::Relu,
                1 => Activation::Tanh,
                _ => Activation::Identity,
            };
            let batch_norm = k + 1 < n_layers && rng.gen_bool(0.5);
            specs.push(LayerSpec {
                out_dim: out,
                activation: act,
                batch_norm,
            });
            dims.push(out);
        }
        let dropout = if n_layers > 1 && rng.gen_bool(0.5) {
            rng.gen_range(0.1..0.4)
        } else {
            0.0
        };
        let net = Mlp::new(in_dim, &specs, dropout, &mut rng).unwrap();
        let batch = rng.gen_range(2..=4);
        let inputs: Vec<Vec<f64>> = (0..batch)
            .map(|_| (0..in_dim).map(|_| rng.gen_range(-1.5..1.5)).collect())
            .collect();
        let out_dim = *dims.last().unwrap();
        let targets: Vec<Vec<f64>> = (0..batch)
            .map(|_| (0..out_dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        (net, inputs, targets)
    }

    /// Central finite differences against the analytic gradient. Shared with
    /// the acceptance suite via the 100-seed loop there.
    pub(crate) fn check_gradients_against_fd(seed: u64) {
        let (mut net, inputs, targets) = random_net(seed);
        let plan = net.sample_dropout_plan(inputs.len(), &mut rng_from_seed(seed ^ 0xabcd));
        let (_, grads, _) = net
            .batch_gradient(&inputs, mse_loss(&targets), Mode::Train, Some(&plan))
            .unwrap();
        let params = net.params_flat();
        let h = 1e-5;
        for i in 0..params.len() {
            let mut plus = params.clone();
            plus[i] += h;
            net.set_params_flat(&plus).unwrap();
            let lp = net
                .batch_loss(
                    &inputs,
                    |b, out| mse_loss(&targets)(b, out).0,
                    Mode::Train,
                    Some(&plan),
                )
                .unwrap();
            let mut minus = params.clone();
            minus[i] -= h;
            net.set_params_flat(&minus).unwrap();
            let lm = net
                .batch_loss(
                    &inputs,
                    |b, out| mse_loss(&targets)(b, out).0,
                    Mode::Train,
                    Some(&plan),
                )
                .unwrap();
            net.set_params_flat(&params).unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            let analytic = grads.0[i];
            let tol = 1e-9 + 1e-4 * analytic.abs().max(numeric.abs());
            assert!(
                (analytic - numeric).abs() <= tol,
                "seed {seed} param {i}: analytic {analytic} vs numeric {numeric}"
            );
        }
    }

    #[test]
    fn gradients_match_finite_differences_on_random_nets() {
        for seed in 0..20 {
            check_gradients_against_fd(seed);
        }
    }

    #[test]
    fn gradients_match_fd_in_eval_mode_too() {
        let (net, inputs, targets) = random_net(77);
        let (_, grads, _) = net
            .batch_gradient(&inputs, mse_loss(&targets), Mode::Eval, None)
            .unwrap();
        let mut probe = net.clone();
        let params = net.params_flat();
        let h = 1e-5;
        for i in (0..params.len()).step_by(3) {
            let mut plus = params.clone();
            plus[i] += h;
            probe.set_params_flat(&plus).unwrap();
            let lp = probe
                .batch_loss(&inputs, |b, out| mse_loss(&targets)(b, out).0, Mode::Eval, None)
                .unwrap();
            let mut minus = params.clone();
            minus[i] -= h;
            probe.set_params_flat(&minus).unwrap();
            let lm = probe
                .batch_loss(&inputs, |b, out| mse_loss(&targets)(b, out).0, Mode::Eval, None)
                .unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            let analytic = grads.0[i];
            let tol = 1e-9 + 1e-4 * analytic.abs().max(numeric.abs());
            assert!((analytic - numeric).abs() <= tol);
        }
    }

    #[test]
    fn checkpoint_roundtrip_preserves_parameters() {
        let mut rng = rng_from_seed(5);
        let net = Mlp::new(
            3,
            &[
                LayerSpec {
                    out_dim: 4,
                    activation: Activation::Relu,
                    batch_norm: true,
                },
                LayerSpec::plain(2, Activation::Identity),
            ],
            0.2,
            &mut rng,
        )
        .unwrap();
        let json = serde_json::to_string(&net).unwrap();
        let back: Mlp = serde_json::from_str(&json).unwrap();
        assert_eq!(net.params_flat(), back.params_flat());
        assert_eq!(net.layer_dims(), back.layer_dims());
    }
}
