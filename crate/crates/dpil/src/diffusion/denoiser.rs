//! Noise predictors and denoiser training.
//!
//! A [`Denoiser`] bundles a noise predictor with the normalization statistics
//! of the demonstrations it was trained on and the schedule it was trained
//! under, so forward/reverse diffusion can never be run against a mismatched
//! schedule. The MLP predictor conditions on the step through a sinusoidal
//! embedding; the analytic Gaussian predictor is a closed-form oracle used
//! heavily by the test suite.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::demos::DemoSet;
use crate::error::{Error, Result};
use crate::nn::{adam_step_mlp, Activation, AdamState, LayerSpec, Mlp, Mode};
use crate::seed::{derive_seed, rng_from_seed};

use super::schedule::NoiseSchedule;

pub const DEFAULT_TIME_EMBED_DIM: usize = 32;
const STD_FLOOR: f64 = 1e-6;

/// Per-dimension standardization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn identity(dim: usize) -> Self {
        NormStats {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Sample mean and (population) standard deviation per dimension, with
    /// the standard deviation floored at 1e-6.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::rejected("cannot compute stats of an empty set"));
        }
        let dim = rows[0].len();
        let mut mean = vec![0.0; dim];
        for row in rows {
            for (d, &v) in row.iter().enumerate() {
                mean[d] += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n as f64;
        }
        let mut var = vec![0.0; dim];
        for row in rows {
            for (d, &v) in row.iter().enumerate() {
                let c = v - mean[d];
                var[d] += c * c;
            }
        }
        let std = var
            .iter()
            .map(|v| (v / n as f64).sqrt().max(STD_FLOOR))
            .collect();
        Ok(NormStats { mean, std })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }

    pub fn denormalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| v * s + m)
            .collect()
    }
}

/// Sinusoidal features of a discrete step, transformer style.
pub fn time_embedding(step: usize, dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim);
    let half = dim / 2;
    for k in 0..half {
        let freq = 1.0 / 10000f64.powf(k as f64 / half as f64);
        let angle = step as f64 * freq;
        out.push(angle.sin());
        out.push(angle.cos());
    }
    if dim % 2 == 1 {
        out.push(0.0);
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum NoisePredictor {
    /// Learned predictor over `[normalized x ; time_embedding(i)]`.
    Mlp { net: Mlp, embed_dim: usize },
    /// Closed-form posterior mean of the noise for data `N(mean, sigma^2 I)`:
    /// `eps_hat = sqrt(1-abar_i) (x - sqrt(abar_i) mean) / (abar_i sigma^2 + 1 - abar_i)`.
    AnalyticGaussian { mean: Vec<f64>, sigma: f64 },
    /// Always predicts zero noise.
    Zero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Denoiser {
    pub predictor: NoisePredictor,
    pub norm_stats: NormStats,
    pub schedule: NoiseSchedule,
    pub data_dim: usize,
    /// Mean training loss over the final epoch; `None` for analytic oracles.
    pub final_train_loss: Option<f64>,
}

impl Denoiser {
    /// Predicted noise for a point `x` (in the denoiser's normalized space)
    /// at schedule step `step`.
    pub fn predict_noise(&self, x: &[f64], step: usize) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.data_dim);
        match &self.predictor {
            NoisePredictor::Mlp { net, embed_dim } => {
                let mut input = Vec::with_capacity(x.len() + embed_dim);
                input.extend_from_slice(x);
                input.extend(time_embedding(step, *embed_dim));
                net.apply(&input).expect("denoiser input dims are fixed")
            }
            NoisePredictor::AnalyticGaussian { mean, sigma } => {
                let abar = self.schedule.alpha_bar(step);
                let denom = abar * sigma * sigma + 1.0 - abar;
                let scale = (1.0 - abar).sqrt() / denom;
                x.iter()
                    .zip(mean)
                    .map(|(&v, &m)| scale * (v - abar.sqrt() * m))
                    .collect()
            }
            NoisePredictor::Zero => vec![0.0; x.len()],
        }
    }
}

/// Analytic test oracle: the exact noise posterior for Gaussian data
/// `N(mu, sigma^2 I)` in un-normalized space.
pub fn gaussian_score_denoiser(
    mu: &[f64],
    sigma: f64,
    schedule: NoiseSchedule,
) -> Result<Denoiser> {
    if sigma <= 0.0 {
        return Err(Error::rejected(format!("sigma must be > 0, got {sigma}")));
    }
    Ok(Denoiser {
        data_dim: mu.len(),
        predictor: NoisePredictor::AnalyticGaussian {
            mean: mu.to_vec(),
            sigma,
        },
        norm_stats: NormStats::identity(mu.len()),
        schedule,
        final_train_loss: None,
    })
}

/// A denoiser that predicts zero noise everywhere; reverse steps then apply
/// only the `1/sqrt(alpha)` drift. Test plumbing.
pub fn zero_denoiser(dim: usize, schedule: NoiseSchedule) -> Denoiser {
    Denoiser {
        data_dim: dim,
        predictor: NoisePredictor::Zero,
        norm_stats: NormStats::identity(dim),
        schedule,
        final_train_loss: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DenoiserTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Total linear layers (the paper's architecture uses five).
    pub n_layers: usize,
    pub hidden_width: usize,
    pub time_embed_dim: usize,
    pub dropout: f64,
    pub batch_norm: bool,
    /// Geometric learning-rate decay: the final epoch runs at
    /// `learning_rate * lr_decay_ratio`. 1.0 keeps the rate constant.
    pub lr_decay_ratio: f64,
    /// Hidden activation; ReLU is the published architecture.
    pub activation: Activation,
}

impl Default for DenoiserTrainConfig {
    fn default() -> Self {
        DenoiserTrainConfig {
            epochs: 10_000,
            batch_size: 64,
            learning_rate: 1e-4,
            n_layers: 5,
            hidden_width: 128,
            time_embed_dim: DEFAULT_TIME_EMBED_DIM,
            dropout: 0.2,
            batch_norm: true,
            lr_decay_ratio: 1.0,
            activation: Activation::Relu,
        }
    }
}

/// Trains an epsilon-predictor on optimal demonstrations.
///
/// Each epoch shuffles the demo rows; for every sample a step
/// `i ~ Uniform{1..T}` and `eps ~ N(0, I)` are drawn, the sample is diffused
/// to `x_i = sqrt(abar_i) x_0 + sqrt(1-abar_i) eps`, and the squared error
/// `|eps_hat - eps|^2` is descended with Adam. Inputs are standardized with
/// statistics computed from the demos before training.
pub fn train_denoiser(
    demos: &DemoSet,
    schedule: &NoiseSchedule,
    cfg: &DenoiserTrainConfig,
    seed: u64,
) -> Result<Denoiser> {
    let rows = demos.rows();
    if rows.is_empty() {
        return Err(Error::rejected("cannot train a denoiser on an empty demo set"));
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 || cfg.n_layers < 2 {
        return Err(Error::rejected(
            "denoiser training needs epochs >= 1, batch_size >= 1, n_layers >= 2",
        ));
    }
    let dim = rows[0].len();
    let stats = NormStats::from_rows(&rows)?;
    let data: Vec<Vec<f64>> = rows.iter().map(|r| stats.normalize(r)).collect();

    let mut specs = Vec::with_capacity(cfg.n_layers);
    for _ in 0..cfg.n_layers - 1 {
        specs.push(LayerSpec {
            out_dim: cfg.hidden_width,
            activation: cfg.activation,
            batch_norm: cfg.batch_norm,
        });
    }
    specs.push(LayerSpec::plain(dim, Activation::Identity));

    let mut init_rng = rng_from_seed(derive_seed(seed, "denoiser-init"));
    let mut net = Mlp::new(dim + cfg.time_embed_dim, &specs, cfg.dropout, &mut init_rng)?;
    let mut opt = AdamState::new(cfg.learning_rate, net.param_count())?;
    let mut rng = rng_from_seed(derive_seed(seed, "denoiser-train"));

    let t_max = schedule.t_max();
    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut final_epoch_loss = f64::NAN;

    for epoch in 0..cfg.epochs {
        if cfg.lr_decay_ratio != 1.0 && cfg.epochs > 1 {
            let frac = epoch as f64 / (cfg.epochs - 1) as f64;
            opt.learning_rate = cfg.learning_rate * cfg.lr_decay_ratio.powf(frac);
        }
        shuffle(&mut order, &mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            // Draw (step, eps) per sample and form the diffused inputs.
            let mut inputs = Vec::with_capacity(chunk.len());
            let mut targets: Vec<Vec<f64>> = Vec::with_capacity(chunk.len());
            for &idx in chunk {
                let step = rng.gen_range(1..=t_max);
                let eps: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let abar = schedule.alpha_bar(step);
                let mut input = Vec::with_capacity(dim + cfg.time_embed_dim);
                for d in 0..dim {
                    input.push(abar.sqrt() * data[idx][d] + (1.0 - abar).sqrt() * eps[d]);
                }
                input.extend(time_embedding(step, cfg.time_embed_dim));
                inputs.push(input);
                targets.push(eps);
            }
            let plan = net.sample_dropout_plan(inputs.len(), &mut rng);
            let (loss, grads, stats_batch) = net
                .batch_gradient(
                    &inputs,
                    |b, out| {
                        let t = &targets[b];
                        let mut loss = 0.0;
                        let mut grad = Vec::with_capacity(out.len());
                        for (o, &tv) in out.iter().zip(t) {
                            let diff = o - tv;
                            loss += diff * diff;
                            grad.push(2.0 * diff / out.len() as f64);
                        }
                        (loss / out.len() as f64, grad)
                    },
                    Mode::Train,
                    Some(&plan),
                )
                .map_err(|e| match e {
                    Error::Numerical(msg) => {
                        Error::Numerical(format!("{msg} (epoch {epoch})"))
                    }
                    other => other,
                })?;
            net.update_running_stats(&stats_batch);
            adam_step_mlp(&mut net, &mut opt, &grads)?;
            epoch_loss += loss;
            batches += 1;
        }
        final_epoch_loss = epoch_loss / batches as f64;
        if !final_epoch_loss.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite training loss at epoch {epoch}"
            )));
        }
    }

    Ok(Denoiser {
        predictor: NoisePredictor::Mlp {
            net,
            embed_dim: cfg.time_embed_dim,
        },
        norm_stats: stats,
        schedule: schedule.clone(),
        data_dim: dim,
        final_train_loss: Some(final_epoch_loss),
    })
}

/// Mean per-dimension squared error of an arbitrary predictor on explicit
/// `(x0, step, eps)` triples, diffusing each `x0` with its given `eps`.
pub fn epsilon_prediction_loss<F>(
    predict: F,
    triples: &[(Vec<f64>, usize, Vec<f64>)],
    schedule: &NoiseSchedule,
) -> f64
where
    F: Fn(&[f64], usize) -> Vec<f64>,
{
    let mut total = 0.0;
    for (x0, step, eps) in triples {
        let abar = schedule.alpha_bar(*step);
        let xi: Vec<f64> = x0
            .iter()
            .zip(eps)
            .map(|(&x, &e)| abar.sqrt() * x + (1.0 - abar).sqrt() * e)
            .collect();
        let pred = predict(&xi, *step);
        let se: f64 = pred
            .iter()
            .zip(eps)
            .map(|(&p, &e)| (p - e) * (p - e))
            .sum();
        total += se / x0.len() as f64;
    }
    total / triples.len() as f64
}

fn shuffle(order: &mut [usize], rng: &mut rand_chacha::ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
}
