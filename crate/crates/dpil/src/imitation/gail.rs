//! Adversarial imitation: alternating discriminator ascent and policy
//! gradient descent on the surrogate reward `-log(1 - D(s, a))`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::demos::DemoSet;
use crate::diffusion::NormStats;
use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::nn::AdamState;
use crate::seed::{derive_seed, rng_from_seed};

use super::discriminator::{discriminator_objective, discriminator_update, Discriminator};
use super::policy::GaussianPolicy;
use super::reinforce::{collect_on_policy, policy_gradient_step};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GailConfig {
    pub n_iters: usize,
    /// Five discriminator updates per policy update, following the paper's
    /// online training recipe.
    pub disc_updates_per_iter: usize,
    pub policy_updates_per_iter: usize,
    /// On-policy transitions gathered per iteration.
    pub rollout_transitions: usize,
    pub gamma: f64,
    pub entropy_coef: f64,
    pub disc_learning_rate: f64,
    pub policy_learning_rate: f64,
    pub disc_batch: usize,
    pub hidden: Vec<usize>,
    /// Normalization for discriminator inputs; when absent it is computed
    /// from the expert demos (the pipeline passes the denoiser's statistics).
    pub norm_stats: Option<NormStats>,
}

impl Default for GailConfig {
    fn default() -> Self {
        GailConfig {
            n_iters: 200,
            disc_updates_per_iter: 5,
            policy_updates_per_iter: 1,
            rollout_transitions: 250,
            gamma: 0.995,
            entropy_coef: 1e-3,
            disc_learning_rate: 3e-4,
            policy_learning_rate: 3e-4,
            disc_batch: 128,
            hidden: vec![100, 100],
            norm_stats: None,
        }
    }
}

impl GailConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iters == 0 || self.disc_updates_per_iter == 0 || self.policy_updates_per_iter == 0
        {
            return Err(Error::rejected("gail iteration counts must by >= 1"));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::rejected(format!(
                "gamma must be in [0, 1), got {}",
                self.gamma
            )));
        }
        if self.rollout_transitions == 0 || self.disc_batch == 0 {
            return Err(Error::rejected("gail batch sizes must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GailIterStats {
    pub iteration: usize,
    pub env_return_mean: f64,
    pub env_return_stderr: f64,
    /// Saddle objective on the full expert set vs. this iteration's rollouts,
    /// after the iteration's discriminator updates.
    pub disc_loss: f64,
}

#[derive(Debug, Clone)]
pub struct GailResult {
    pub policy: GaussianPolicy,
    pub curve: Vec<GailIterStats>,
}

pub fn gail_train<E>(demos: &DemoSet, env: &E, cfg: &GailConfig, seed: u64) -> Result<GailResult>
where
    E: Environment + ?Sized,
{
    cfg.validate()?;
    if demos.is_empty() {
        return Err(Error::rejected("gail_train requires a non-empty demo set"));
    }
    if demos.state_dim != env.state_dim() || demos.action_dim != env.action_dim() {
        return Err(Error::dim(
            "gail demos vs env dims",
            env.state_dim() + env.action_dim(),
            demos.state_dim + demos.action_dim,
        ));
    }
    let expert_rows = demos.rows();
    let norm = match &cfg.norm_stats {
        Some(n) => n.clone(),
        None => NormStats::from_rows(&expert_rows)?,
    };
    let mut policy = GaussianPolicy::new(
        env.state_dim(),
        env.action_dim(),
        &cfg.hidden,
        Some((env.action_low().to_vec(), env.action_high().to_vec())),
        derive_seed(seed, "gail-policy-init"),
    )?;
    let mut disc = Discriminator::new(
        env.state_dim(),
        env.action_dim(),
        &cfg.hidden,
        norm,
        derive_seed(seed, "gail-disc-init"),
    )?;
    let mut policy_opt = AdamState::new(cfg.policy_learning_rate, policy.net().param_count())?;
    let mut disc_opt = AdamState::new(cfg.disc_learning_rate, disc.net().param_count())?;
    let mut batch_rng = rng_from_seed(derive_seed(seed, "gail-disc-batches"));

    let mut curve = Vec::with_capacity(cfg.n_iters);
    for iter in 0..cfg.n_iters {
        let episodes = collect_on_policy(
            &policy,
            env,
            cfg.rollout_transitions,
            derive_seed(seed, "gail-rollout"),
            iter,
        );
        let agent_rows: Vec<Vec<f64>> = episodes
            .iter()
            .flatten()
            .map(|s| {
                let mut row = Vec::with_capacity(s.state.len() + s.executed.len());
                row.extend_from_slice(&s.state);
                row.extend_from_slice(&s.executed);
                row
            })
            .collect();

        // Environment-return statistics of the current policy.
        let returns: Vec<f64> = episodes
            .iter()
            .map(|ep| ep.iter().map(|s| s.reward).sum::<f64>())
            .collect();
        let mean = returns.iter().sum::<f64>() / returns.len() as f64;
        let stderr = if returns.len() > 1 {
            let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
                / (returns.len() as f64 - 1.0);
            (var / returns.len() as f64).sqrt()
        } else {
            0.0
        };

        for _ in 0..cfg.disc_updates_per_iter {
            let expert_batch = sample_rows(&expert_rows, cfg.disc_batch, &mut batch_rng);
            let agent_batch = sample_rows(&agent_rows, cfg.disc_batch, &mut batch_rng);
            discriminator_update(&mut disc, &expert_batch, &agent_batch, &mut disc_opt)?;
        }
        let disc_loss = discriminator_objective(&disc, &expert_rows, &agent_rows)?;

        // Relabel rollouts with the surrogate reward and step the policy.
        let mut surrogate = episodes;
        for ep in surrogate.iter_mut() {
            for step in ep.iter_mut() {
                let mut row = step.state.clone();
                row.extend_from_slice(&step.executed);
                step.reward = disc.surrogate_reward(&row)?;
            }
        }
        for _ in 0..cfg.policy_updates_per_iter {
            let loss = policy_gradient_step(
                &mut policy,
                &surrogate,
                cfg.gamma,
                cfg.entropy_coef,
                &mut policy_opt,
            )?;
            if !loss.is_finite() {
                return Err(Error::Numerical(format!(
                    "gail diverged at iteration {iter}"
                )));
            }
        }

        curve.push(GailIterStats {
            iteration: iter,
            env_return_mean: mean,
            env_return_stderr: stderr,
            disc_loss,
        });
    }
    Ok(GailResult { policy, curve })
}

fn sample_rows(
    rows: &[Vec<f64>],
    batch: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<Vec<f64>> {
    (0..batch.min(rows.len()))
        .map(|_| rows[rng.gen_range(0..rows.len())].clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demos::collect_demos;
    use crate::envs::PointReach;

    fn tiny_cfg() -> GailConfig {
        GailConfig {
            n_iters: 3,
            disc_updates_per_iter: 2,
            rollout_transitions: 60,
            disc_batch: 32,
            hidden: vec![16, 16],
            ..GailConfig::default()
        }
    }

    #[test]
    fn training_is_seed_deterministic() {
        let env = PointReach::default_desk();
        let demos = collect_demos(&env.optimal_policy(), &env, 80, 3, "optimal").unwrap();
        let a = gail_train(&demos, &env, &tiny_cfg(), 5).unwrap();
        let b = gail_train(&demos, &env, &tiny_cfg(), 5).unwrap();
        assert_eq!(a.policy.net().params_flat(), b.policy.net().params_flat());
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.curve.len(), 3);
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny_cfg();
        cfg.gamma = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = tiny_cfg();
        cfg.n_iters = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn dim_mismatch_rejected() {
        let env = PointReach::default_desk();
        let demos = crate::demos::DemoSet::new(1, 1, "bad", crate::demos::GeneratorMeta::None);
        assert!(gail_train(&demos, &env, &tiny_cfg(), 0).is_err());
    }
}
