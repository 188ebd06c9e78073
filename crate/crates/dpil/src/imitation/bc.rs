//! Behavioral cloning: maximum log-likelihood of demo actions under the
//! Gaussian policy.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::demos::DemoSet;
use crate::error::{Error, Result};
use crate::nn::{adam_step_mlp, AdamState, Mode};
use crate::seed::{derive_seed, rng_from_seed};

use super::policy::{GaussianHead, GaussianPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BcConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    pub action_bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl Default for BcConfig {
    fn default() -> Self {
        BcConfig {
            epochs: 1000,
            batch_size: 256,
            learning_rate: 1e-3,
            hidden: vec![100, 100],
            action_bounds: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BcResult {
    pub policy: GaussianPolicy,
    /// Mean negative log-likelihood over the final epoch.
    pub final_nll: f64,
}

pub fn bc_train(demos: &DemoSet, cfg: &BcConfig, seed: u64) -> Result<BcResult> {
    if demos.is_empty() {
        return Err(Error::rejected("bc_train requires a non-empty demo set"));
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(Error::rejected("bc_train needs epochs >= 1 and batch_size >= 1"));
    }
    let mut policy = GaussianPolicy::new(
        demos.state_dim,
        demos.action_dim,
        &cfg.hidden,
        cfg.action_bounds.clone(),
        derive_seed(seed, "bc-init"),
    )?;
    let states: Vec<Vec<f64>> = demos.transitions.iter().map(|t| t.state.clone()).collect();
    let actions: Vec<Vec<f64>> = demos.transitions.iter().map(|t| t.action.clone()).collect();

    let mut opt = AdamState::new(cfg.learning_rate, policy.net().param_count())?;
    let mut rng = rng_from_seed(derive_seed(seed, "bc-shuffle"));
    let mut order: Vec<usize> = (0..states.len()).collect();
    let mut final_nll = f64::NAN;

    for epoch in 0..cfg.epochs {
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let inputs: Vec<Vec<f64>> = chunk.iter().map(|&i| states[i].clone()).collect();
            let (loss, grads, _) = policy.net().batch_gradient(
                &inputs,
                |b, out| GaussianHead::nll(out, &actions[chunk[b]]),
                Mode::Eval,
                None,
            )?;
            adam_step_mlp(policy.net_mut(), &mut opt, &grads)?;
            epoch_loss += loss;
            batches += 1;
        }
        final_nll = epoch_loss / batches as f64;
        if !final_nll.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite BC loss at epoch {epoch}"
            )));
        }
    }
    Ok(BcResult { policy, final_nll })
}
