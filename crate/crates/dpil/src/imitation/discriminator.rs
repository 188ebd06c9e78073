//! GAIL discriminator: `D(s, a) = sigmoid(V(s, a))` over the normalized
//! state-action concatenation.

use serde::{Deserialize, Serialize};

use crate::diffusion::NormStats;
use crate::error::{Error, Result};
use crate::nn::{adam_step_mlp, Activation, AdamState, LayerSpec, Mlp, Mode};
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Discriminator {
    net: Mlp,
    norm: NormStats,
    state_dim: usize,
    action_dim: usize,
}

impl Discriminator {
    /// `norm` should be the same statistics the denoiser was trained with so
    /// the discriminator sees inputs on a stable scale.
    pub fn new(
        state_dim: usize,
        action_dim: usize,
        hidden: &[usize],
        norm: NormStats,
        seed: u64,
    ) -> Result<Self> {
        let dim = state_dim + action_dim;
        if norm.dim() != dim {
            return Err(Error::dim("discriminator norm stats", dim, norm.dim()));
        }
        let mut specs: Vec<LayerSpec> = hidden
            .iter()
            .map(|&w| LayerSpec::plain(w, Activation::Tanh))
            .collect();
        specs.push(LayerSpec::plain(1, Activation::Identity));
        let mut rng = rng_from_seed(seed);
        let net = Mlp::new(dim, &specs, 0.0, &mut rng)?;
        Ok(Discriminator {
            net,
            norm,
            state_dim,
            action_dim,
        })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    /// Unconstrained logit `V(s, a)` on a raw `concat(s, a)` row.
    pub fn logit(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.state_dim + self.action_dim {
            return Err(Error::dim(
                "discriminator input",
                self.state_dim + self.action_dim,
                row.len(),
            ));
        }
        Ok(self.net.apply(&self.norm.normalize(row))?[0])
    }

    pub fn prob(&self, row: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.logit(row)?))
    }

    /// Surrogate policy reward `-log(1 - D) = softplus(V)`.
    pub fn surrogate_reward(&self, row: &[f64]) -> Result<f64> {
        Ok(softplus(self.logit(row)?))
    }
}

#[inline]
pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (1.0 + (-x.abs()).exp()).ln()
}

/// The saddle objective `E_expert[log D] + E_agent[log(1 - D)]`, evaluated
/// without touching parameters. At `D = 1/2` everywhere this is `-2 ln 2`.
pub fn discriminator_objective(
    disc: &Discriminator,
    expert_rows: &[Vec<f64>],
    agent_rows: &[Vec<f64>],
) -> Result<f64> {
    if expert_rows.is_empty() || agent_rows.is_empty() {
        return Err(Error::rejected("discriminator batches must be non-empty"));
    }
    let mut expert_term = 0.0;
    for row in expert_rows {
        let v = disc.logit(row)?;
        expert_term += -softplus(-v); // log D
    }
    let mut agent_term = 0.0;
    for row in agent_rows {
        let v = disc.logit(row)?;
        agent_term += -softplus(v); // log(1 - D)
    }
    Ok(expert_term / expert_rows.len() as f64 + agent_term / agent_rows.len() as f64)
}

/// One ascent step on the objective (implemented as Adam descent on its
/// negation). Returns the objective value before the step.
pub fn discriminator_update(
    disc: &mut Discriminator,
    expert_rows: &[Vec<f64>],
    agent_rows: &[Vec<f64>],
    opt: &mut AdamState,
) -> Result<f64> {
    if expert_rows.is_empty() || agent_rows.is_empty() {
        return Err(Error::rejected("discriminator batches must be non-empty"));
    }
    let n_e = expert_rows.len();
    let n_a = agent_rows.len();
    let n = n_e + n_a;
    let mut inputs = Vec::with_capacity(n);
    for row in expert_rows.iter().chain(agent_rows) {
        if row.len() != disc.state_dim + disc.action_dim {
            return Err(Error::dim(
                "discriminator input",
                disc.state_dim + disc.action_dim,
                row.len(),
            ));
        }
        inputs.push(disc.norm.normalize(row));
    }
    // Per-sample losses are scaled so the batch mean equals
    // -(E_expert[log D] + E_agent[log(1-D)]).
    let expert_scale = n as f64 / n_e as f64;
    let agent_scale = n as f64 / n_a as f64;
    let (loss, grads, _) = disc.net.batch_gradient(
        &inputs,
        |b, out| {
            let v = out[0];
            if b < n_e {
                // -log D = softplus(-v); d/dv = -(1 - sigmoid(v)) = sigmoid(v) - 1
                (expert_scale * softplus(-v), vec![expert_scale * (sigmoid(v) - 1.0)])
            } else {
                // -log(1-D) = softplus(v); d/dv = sigmoid(v)
                (agent_scale * softplus(v), vec![agent_scale * sigmoid(v)])
            }
        },
        Mode::Eval,
        None,
    )?;
    adam_step_mlp(&mut disc.net, opt, &grads)?;
    Ok(-loss)
}
