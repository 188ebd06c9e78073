//! Diagonal-Gaussian policy over continuous actions.
//!
//! The network maps a state to `(mean, log_std)` for each action dimension;
//! log-stds are clamped to `[-5, 2]` and sampled actions are clipped to the
//! action bounds when present. Log densities are those of the unclipped
//! Gaussian.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::envs::ActionSource;
use crate::error::{Error, Result};
use crate::nn::{Activation, LayerSpec, Mlp};
use crate::seed::rng_from_seed;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianPolicy {
    net: Mlp,
    state_dim: usize,
    action_dim: usize,
    bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl GaussianPolicy {
    /// Two hidden Tanh layers of width 100 by default (pass `hidden` to
    /// change). Bounds of `None` leave samples unclipped.
    pub fn new(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        bounds: Option<(Vec<f64>, Vec<f64>)>,
        seed: u64,
    ) -> Result<Self> {
        if state_dim == 0 || action_dim == 0 {
            return Err(Error::rejected("policy dims must be positive"));
        }
        if let Some((low, high)) = &bounds {
            if low.len() != action_dim || high.len() != action_dim {
                return Err(Error::dim("policy bounds", action_dim, low.len().min(high.len())));
            }
        }
        let mut specs: Vec<LayerSpec> = hidden
            .iter()
            .map(|&w| LayerSpec::plain(w, Activation::Tanh))
            .collect();
        specs.push(LayerSpec::plain(2 * action_dim, Activation::Identity));
        let mut rng = rng_from_seed(seed);
        let net = Mlp::new(state_dim, &specs, 0.0, &mut rng)?;
        Ok(GaussianPolicy {
            net,
            state_dim,
            action_dim,
            bounds,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub(crate) fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    /// Replaces the underlying network; dims must match. Test plumbing.
    pub fn with_net(mut self, net: Mlp) -> Result<Self> {
        if net.in_dim() != self.state_dim || net.out_dim() != 2 * self.action_dim {
            return Err(Error::dim(
                "policy net output",
                2 * self.action_dim,
                net.out_dim(),
            ));
        }
        self.net = net;
        Ok(self)
    }

    /// Mean and clamped log-std at a state.
    pub fn mean_log_std(&self, state: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if state.len() != self.state_dim {
            return Err(Error::dim("policy state", self.state_dim, state.len()));
        }
        let out = self.net.apply(state)?;
        let (mean, raw) = out.split_at(self.action_dim);
        let log_std = raw
            .iter()
            .map(|&l| l.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect();
        Ok((mean.to_vec(), log_std))
    }

    pub fn sample(&self, state: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        Ok(self.sample_raw(state, rng)?.1)
    }

    /// Draws `(raw, executed)` actions: the raw Gaussian sample and its
    /// clipped counterpart. Policy-gradient updates score the raw draw (the
    /// density actually sampled from); environments execute the clipped one.
    pub fn sample_raw(&self, state: &[f64], rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Vec<f64>)> {
        let (mean, log_std) = self.mean_log_std(state)?;
        let raw: Vec<f64> = mean
            .iter()
            .zip(&log_std)
            .map(|(&m, &l)| {
                let eta: f64 = StandardNormal.sample(rng);
                m + l.exp() * eta
            })
            .collect();
        let mut executed = raw.clone();
        if let Some((low, high)) = &self.bounds {
            for (d, a) in executed.iter_mut().enumerate() {
                *a = a.max(low[d]).min(high[d]);
            }
        }
        Ok((raw, executed))
    }

    /// Exact diagonal-Gaussian log density of `action` at this state.
    pub fn log_prob(&self, state: &[f64], action: &[f64]) -> Result<f64> {
        if action.len() != self.action_dim {
            return Err(Error::dim("policy action", self.action_dim, action.len()));
        }
        let (mean, log_std) = self.mean_log_std(state)?;
        let mut lp = 0.0;
        for d in 0..self.action_dim {
            let z = (action[d] - mean[d]) * (-log_std[d]).exp();
            lp += -0.5 * LN_2PI - log_std[d] - 0.5 * z * z;
        }
        Ok(lp)
    }

    /// Differential entropy of the action distribution at a state.
    pub fn entropy(&self, state: &[f64]) -> Result<f64> {
        let (_, log_std) = self.mean_log_std(state)?;
        Ok(log_std.iter().map(|l| l + 0.5 * (LN_2PI + 1.0)).sum())
    }
}

impl ActionSource for GaussianPolicy {
    fn act(&self, state: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.sample(state, rng).expect("state dims fixed by env")
    }
}

/// Free-function form of [`GaussianPolicy::log_prob`].
pub fn policy_log_prob(policy: &GaussianPolicy, state: &[f64], action: &[f64]) -> Result<f64> {
    policy.log_prob(state, action)
}

/// Per-sample loss pieces computed from the raw network output
/// `[mean ; raw_log_std]`. Used by the BC and policy-gradient trainers so the
/// loss gradient matches the applied clamp exactly (zero gradient where the
/// clamp is active).
pub(crate) struct GaussianHead;

impl GaussianHead {
    /// Negative log likelihood and gradient w.r.t. the raw output.
    pub fn nll(out: &[f64], action: &[f64]) -> (f64, Vec<f64>) {
        let a_dim = action.len();
        let mut loss = 0.0;
        let mut grad = vec![0.0; out.len()];
        for d in 0..a_dim {
            let raw = out[a_dim + d];
            let l = raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
            let inv_std = (-l).exp();
            let z = (action[d] - out[d]) * inv_std;
            loss += 0.5 * LN_2PI + l + 0.5 * z * z;
            grad[d] = -z * inv_std;
            let gate = if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw) { 1.0 } else { 0.0 };
            grad[a_dim + d] = gate * (1.0 - z * z);
        }
        (loss, grad)
    }

    /// REINFORCE surrogate `-advantage * log pi - ent_coef * H` and its
    /// gradient w.r.t. the raw output.
    pub fn pg(out: &[f64], action: &[f64], advantage: f64, ent_coef: f64) -> (f64, Vec<f64>) {
        let a_dim = action.len();
        let mut loss = 0.0;
        let mut grad = vec![0.0; out.len()];
        for d in 0..a_dim {
            let raw = out[a_dim + d];
            let l = raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
            let inv_std = (-l).exp();
            let z = (action[d] - out[d]) * inv_std;
            let log_pdf = -0.5 * LN_2PI - l - 0.5 * z * z;
            let entropy = l + 0.5 * (LN_2PI + 1.0);
            loss += -advantage * log_pdf - ent_coef * entropy;
            grad[d] = -advantage * z * inv_std;
            let gate = if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw) { 1.0 } else { 0.0 };
            grad[a_dim + d] = gate * (-advantage * (z * z - 1.0) - ent_coef);
        }
        (loss, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, LayerSpec, Mlp};

    /// Policy with constant mean and log-std, independent of state.
    fn constant_policy(mean: &[f64], log_std: &[f64]) -> GaussianPolicy {
        let a = mean.len();
        let out_dim = 2 * a;
        let weights = vec![vec![0.0; out_dim * a]];
        let mut bias = mean.to_vec();
        bias.extend_from_slice(log_std);
        let net = Mlp::from_params(
            a,
            &[LayerSpec::plain(out_dim, Activation::Identity)],
            weights,
            vec![bias],
        )
        .unwrap();
        GaussianPolicy::new(a, a, &[], None, 0)
            .unwrap()
            .with_net(net)
            .unwrap()
    }

    #[test]
    fn log_prob_at_mean_with_unit_std() {
        // At the mean with std 1 in d dims: -(d/2) ln(2 pi).
        for d in [1usize, 3] {
            let policy = constant_policy(&vec![0.3; d], &vec![0.0; d]);
            let lp = policy.log_prob(&vec![0.0; d], &vec![0.3; d]).unwrap();
            let expected = -(d as f64) / 2.0 * LN_2PI;
            assert!((lp - expected).abs() < 1e-12, "{lp} vs {expected}");
        }
    }

    #[test]
    fn one_sigma_shift_costs_half() {
        let policy = constant_policy(&[1.0, 2.0], &[0.5, -0.3]);
        let state = [0.0, 0.0];
        let at_mean = policy.log_prob(&state, &[1.0, 2.0]).unwrap();
        let shifted = policy
            .log_prob(&state, &[1.0 + 0.5f64.exp(), 2.0])
            .unwrap();
        assert!((at_mean - shifted - 0.5).abs() < 1e-12);
    }

    #[test]
    fn log_prob_is_maximized_at_mean() {
        let policy = constant_policy(&[0.7], &[-0.2]);
        let at_mean = policy.log_prob(&[0.0], &[0.7]).unwrap();
        for a in [-1.0, 0.0, 0.5, 0.9, 2.0] {
            if (a - 0.7f64).abs() > 1e-12 {
                assert!(policy.log_prob(&[0.0], &[a]).unwrap() < at_mean);
            }
        }
    }

    #[test]
    fn dim_mismatch_rejected() {
        let policy = constant_policy(&[0.0], &[0.0]);
        assert!(policy.log_prob(&[0.0], &[0.0, 1.0]).is_err());
        assert!(policy.log_prob(&[0.0, 1.0], &[0.0]).is_err());
    }

    #[test]
    fn samples_respect_bounds() {
        let mut policy = constant_policy(&[0.0, 0.0], &[1.0, 1.0]);
        policy.bounds = Some((vec![-0.5, -0.5], vec![0.5, 0.5]));
        let mut rng = crate::seed::rng_from_seed(7);
        for _ in 0..200 {
            let a = policy.sample(&[0.0, 0.0], &mut rng).unwrap();
            assert!(a.iter().all(|v| (-0.5..=0.5).contains(v)));
        }
    }
}
