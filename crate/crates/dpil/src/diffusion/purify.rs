//! Forward diffusion, reverse denoising, and the two-step purification.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::demos::DemoSet;
use crate::error::{Error, Result};
use crate::seed::{derive_indexed, parallel_map, rng_from_seed};

use super::denoiser::Denoiser;
use super::schedule::{t_to_step, NoiseSchedule};

/// Fixed noise injections for deterministic tests: `epsilon` is used by the
/// forward step, `z` at every reverse step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedNoise {
    pub epsilon: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PurifyConfig {
    /// Purification time in (0, 1]; mapped to a discrete step by
    /// `i* = max(1, round(t* T))`.
    pub t_star: f64,
    /// Inject `sqrt(beta_1) z` at the final reverse step (i = 1). Standard
    /// DDPM sampling leaves the last step noiseless; off by default.
    pub noise_at_final_step: bool,
    pub deterministic_noise: Option<FixedNoise>,
}

impl Default for PurifyConfig {
    fn default() -> Self {
        PurifyConfig {
            t_star: 0.1,
            noise_at_final_step: false,
            deterministic_noise: None,
        }
    }
}

impl PurifyConfig {
    pub fn new(t_star: f64) -> Result<Self> {
        let cfg = PurifyConfig {
            t_star,
            ..PurifyConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_star > 0.0 && self.t_star <= 1.0) {
            return Err(Error::rejected(format!(
                "t_star must be in (0, 1], got {}",
                self.t_star
            )));
        }
        Ok(())
    }

    pub fn i_star(&self, t_max: usize) -> usize {
        t_to_step(self.t_star, t_max)
    }
}

fn check_step(i_star: usize, schedule: &NoiseSchedule) -> Result<()> {
    if i_star == 0 || i_star > schedule.t_max() {
        return Err(Error::rejected(format!(
            "i_star {} outside 1..={}",
            i_star,
            schedule.t_max()
        )));
    }
    Ok(())
}

/// One-shot forward diffusion to step `i_star` with explicit noise:
/// `x_{i*} = sqrt(abar_{i*}) x0 + sqrt(1-abar_{i*}) eps`.
pub fn forward_diffuse_with(
    x0: &[f64],
    i_star: usize,
    schedule: &NoiseSchedule,
    eps: &[f64],
) -> Result<Vec<f64>> {
    check_step(i_star, schedule)?;
    if eps.len() != x0.len() {
        return Err(Error::dim("forward_diffuse eps", x0.len(), eps.len()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::rejected("x0 must be finite"));
    }
    let abar = schedule.alpha_bar(i_star);
    Ok(x0
        .iter()
        .zip(eps)
        .map(|(&x, &e)| abar.sqrt() * x + (1.0 - abar).sqrt() * e)
        .collect())
}

/// Forward diffusion with noise drawn from `rng`.
pub fn forward_diffuse(
    x0: &[f64],
    i_star: usize,
    schedule: &NoiseSchedule,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let eps: Vec<f64> = (0..x0.len()).map(|_| StandardNormal.sample(rng)).collect();
    forward_diffuse_with(x0, i_star, schedule, &eps)
}

/// Reverse denoising from step `i_star` down to 0 with an explicit noise
/// vector per step (`z_steps[0]` is used at step `i_star`, the last entry at
/// step 1). The caller controls final-step noise by what it passes.
pub fn reverse_denoise_with(
    x_start: &[f64],
    i_star: usize,
    denoiser: &Denoiser,
    z_steps: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let schedule = &denoiser.schedule;
    check_step(i_star, schedule)?;
    if x_start.len() != denoiser.data_dim {
        return Err(Error::dim("reverse_denoise input", denoiser.data_dim, x_start.len()));
    }
    if z_steps.len() != i_star {
        return Err(Error::dim("reverse_denoise z sequence", i_star, z_steps.len()));
    }
    let mut x = x_start.to_vec();
    for (row, step) in (1..=i_star).rev().enumerate() {
        let z = &z_steps[row];
        if z.len() != x.len() {
            return Err(Error::dim("reverse_denoise z", x.len(), z.len()));
        }
        let alpha = schedule.alpha(step);
        let abar = schedule.alpha_bar(step);
        let beta = schedule.beta(step);
        let coef = (1.0 - alpha) / (1.0 - abar).sqrt();
        let eps_hat = denoiser.predict_noise(&x, step);
        for d in 0..x.len() {
            x[d] = (x[d] - coef * eps_hat[d]) / alpha.sqrt() + beta.sqrt() * z[d];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite state during reverse diffusion at step {step}"
            )));
        }
    }
    Ok(x)
}

/// Reverse denoising with noise drawn from `rng`. `z = 0` at the final step
/// unless `noise_at_final_step` is set.
pub fn reverse_denoise(
    x_start: &[f64],
    i_star: usize,
    denoiser: &Denoiser,
    rng: &mut ChaCha8Rng,
    noise_at_final_step: bool,
) -> Result<Vec<f64>> {
    let dim = x_start.len();
    let z_steps: Vec<Vec<f64>> = (1..=i_star)
        .rev()
        .map(|step| {
            if step == 1 && !noise_at_final_step {
                vec![0.0; dim]
            } else {
                (0..dim).map(|_| StandardNormal.sample(rng)).collect()
            }
        })
        .collect();
    reverse_denoise_with(x_start, i_star, denoiser, &z_steps)
}

/// Two-step purification of a single un-normalized `(s, a)` point: normalize
/// with the denoiser's statistics, forward-diffuse to `i*`, reverse-denoise
/// to 0, denormalize.
pub fn purify(
    x0: &[f64],
    cfg: &PurifyConfig,
    denoiser: &Denoiser,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if x0.len() != denoiser.data_dim {
        return Err(Error::dim("purify input", denoiser.data_dim, x0.len()));
    }
    let i_star = cfg.i_star(denoiser.schedule.t_max());
    let normalized = denoiser.norm_stats.normalize(x0);
    let recovered = match &cfg.deterministic_noise {
        Some(fixed) => {
            let diffused =
                forward_diffuse_with(&normalized, i_star, &denoiser.schedule, &fixed.epsilon)?;
            let z_steps = vec![fixed.z.clone(); i_star];
            reverse_denoise_with(&diffused, i_star, denoiser, &z_steps)?
        }
        None => {
            let diffused = forward_diffuse(&normalized, i_star, &denoiser.schedule, rng)?;
            reverse_denoise(&diffused, i_star, denoiser, rng, cfg.noise_at_final_step)?
        }
    };
    Ok(denoiser.norm_stats.denormalize(&recovered))
}

/// Purifies every transition of a demo set independently. Transition `k` uses
/// a stream derived from `(seed, k)`, so any worker count produces the same
/// bytes as a serial run. Episode structure, ordering, and metadata are
/// preserved; purified rows are re-split into state and action at the
/// original boundary.
pub fn purify_dataset(
    demos: &DemoSet,
    cfg: &PurifyConfig,
    denoiser: &Denoiser,
    seed: u64,
    workers: usize,
) -> Result<DemoSet> {
    cfg.validate()?;
    let dim = demos.state_dim + demos.action_dim;
    if dim != denoiser.data_dim {
        return Err(Error::dim("purify_dataset demos", denoiser.data_dim, dim));
    }
    let results: Vec<Result<Vec<f64>>> = parallel_map(demos.transitions.len(), workers, |k| {
        let tr = &demos.transitions[k];
        let mut row = Vec::with_capacity(dim);
        row.extend_from_slice(&tr.state);
        row.extend_from_slice(&tr.action);
        let mut rng = rng_from_seed(derive_indexed(seed, "purify-transition", k as u64));
        purify(&row, cfg, denoiser, &mut rng)
    });

    let mut out = DemoSet::new(
        demos.state_dim,
        demos.action_dim,
        format!("{}-purified", demos.source_label),
        demos.generator_meta.clone(),
    );
    for (tr, purified) in demos.transitions.iter().zip(results) {
        let row = purified?;
        let mut t = tr.clone();
        t.state = row[..demos.state_dim].to_vec();
        t.action = row[demos.state_dim..].to_vec();
        out.transitions.push(t);
    }
    Ok(out)
}

/// Provenance record for one purification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurifyManifest {
    pub seed: u64,
    pub t_star: f64,
    pub i_star: usize,
    pub schedule_hash: u64,
    pub dataset_hash_in: u64,
    pub dataset_hash_out: u64,
}

impl PurifyManifest {
    pub fn new(
        seed: u64,
        cfg: &PurifyConfig,
        denoiser: &Denoiser,
        input: &DemoSet,
        output: &DemoSet,
    ) -> Self {
        PurifyManifest {
            seed,
            t_star: cfg.t_star,
            i_star: cfg.i_star(denoiser.schedule.t_max()),
            schedule_hash: denoiser.schedule.content_hash(),
            dataset_hash_in: input.content_hash(),
            dataset_hash_out: output.content_hash(),
        }
    }
}
