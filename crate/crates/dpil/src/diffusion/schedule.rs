//! Discrete DDPM noise schedule: the beta/alpha/alpha-bar tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::fnv1a64;

/// Variance schedule over steps `1..=T`. `alpha[i] = 1 - beta[i]` and
/// `alpha_bar[i]` is the running product of alphas up to step `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    beta: Vec<f64>,
    alpha: Vec<f64>,
    alpha_bar: Vec<f64>,
}

impl NoiseSchedule {
    /// Linear schedule: `beta_i = beta_1 + (i-1)/(T-1) * (beta_T - beta_1)`.
    pub fn linear(t_max: usize, beta_1: f64, beta_t: f64) -> Result<Self> {
        if t_max == 0 {
            return Err(Error::rejected("schedule needs T >= 1"));
        }
        if !(beta_1 > 0.0 && beta_1 <= beta_t && beta_t < 1.0) {
            return Err(Error::rejected(format!(
                "betas must satisfy 0 < beta_1 <= beta_T < 1, got ({beta_1}, {beta_t})"
            )));
        }
        let beta: Vec<f64> = if t_max == 1 {
            vec![beta_1]
        } else {
            (0..t_max)
                .map(|i| beta_1 + (i as f64 / (t_max - 1) as f64) * (beta_t - beta_1))
                .collect()
        };
        let alpha: Vec<f64> = beta.iter().map(|b| 1.0 - b).collect();
        let mut alpha_bar = Vec::with_capacity(t_max);
        let mut prod = 1.0;
        for &a in &alpha {
            prod *= a;
            alpha_bar.push(prod);
        }
        Ok(NoiseSchedule {
            beta,
            alpha,
            alpha_bar,
        })
    }

    /// Number of diffusion steps T.
    pub fn t_max(&self) -> usize {
        self.beta.len()
    }

    /// `beta_i` for a 1-based step in `1..=T`.
    #[inline]
    pub fn beta(&self, step: usize) -> f64 {
        assert!(step >= 1 && step <= self.t_max(), "step {step} out of range");
        self.beta[step - 1]
    }

    #[inline]
    pub fn alpha(&self, step: usize) -> f64 {
        assert!(step >= 1 && step <= self.t_max(), "step {step} out of range");
        self.alpha[step - 1]
    }

    #[inline]
    pub fn alpha_bar(&self, step: usize) -> f64 {
        assert!(step >= 1 && step <= self.t_max(), "step {step} out of range");
        self.alpha_bar[step - 1]
    }

    /// Content hash over the bit patterns of the beta table; used in
    /// purification manifests.
    pub fn content_hash(&self) -> u64 {
        let mut bytes = Vec::with_capacity(8 * self.beta.len());
        for b in &self.beta {
            bytes.extend_from_slice(&b.to_bits().to_le_bytes());
        }
        fnv1a64(&bytes)
    }
}

/// Maps a continuous purification time `t` in (0, 1] to a discrete step:
/// `i* = max(1, round(t * T))`.
pub fn t_to_step(t: f64, t_max: usize) -> usize {
    ((t * t_max as f64).round() as usize).clamp(1, t_max)
}
