//! REINFORCE with a mean baseline — the on-policy inner step for GAIL and
//! the trainer that produces checkpoint policy snapshots.

use serde::{Deserialize, Serialize};

use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::nn::{adam_step_mlp, AdamState, Mode};
use crate::seed::{derive_indexed, derive_seed, rng_from_seed};

use super::policy::{GaussianHead, GaussianPolicy};

/// A policy captured at a fraction of a training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicySnapshot {
    pub fraction: f64,
    pub policy: GaussianPolicy,
}

/// One on-policy transition. `action` is the raw Gaussian draw the gradient
/// scores; `executed` is the clipped action the environment saw.
#[derive(Debug, Clone)]
pub struct OnPolicyStep {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub executed: Vec<f64>,
    pub reward: f64,
}

/// Discounted reward-to-go for one episode.
pub fn returns_to_go(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (i, &r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        out[i] = acc;
    }
    out
}

/// One REINFORCE-with-baseline step on rollouts generated by `policy`.
///
/// The advantage of each transition is its discounted reward-to-go minus the
/// per-timestep mean over the batch (a time-dependent baseline; reward-to-go
/// magnitudes differ far more across timesteps than across actions, so a
/// global mean buries the action signal). Advantages are then rescaled by
/// their standard deviation (when nonzero) so the step size does not track
/// the reward magnitude. The update ascends `E[advantage * log pi]` plus an
/// entropy bonus. With zero advantages and a zero entropy coefficient the
/// parameters are exactly unchanged. Returns the surrogate loss.
pub fn policy_gradient_step(
    policy: &mut GaussianPolicy,
    episodes: &[Vec<OnPolicyStep>],
    gamma: f64,
    entropy_coef: f64,
    opt: &mut AdamState,
) -> Result<f64> {
    if episodes.is_empty() || episodes.iter().all(|e| e.is_empty()) {
        return Err(Error::rejected("policy_gradient_step needs rollout data"));
    }
    let mut states = Vec::new();
    let mut actions = Vec::new();
    let mut returns = Vec::new();
    let mut step_index = Vec::new();
    for ep in episodes {
        let rewards: Vec<f64> = ep.iter().map(|s| s.reward).collect();
        let rtg = returns_to_go(&rewards, gamma);
        for (t, (step, g)) in ep.iter().zip(rtg).enumerate() {
            states.push(step.state.clone());
            actions.push(step.action.clone());
            returns.push(g);
            step_index.push(t);
        }
    }
    let max_t = step_index.iter().copied().max().unwrap_or(0);
    let mut baseline_sum = vec![0.0; max_t + 1];
    let mut baseline_count = vec![0usize; max_t + 1];
    for (&g, &t) in returns.iter().zip(&step_index) {
        baseline_sum[t] += g;
        baseline_count[t] += 1;
    }
    let baseline: Vec<f64> = baseline_sum
        .iter()
        .zip(&baseline_count)
        .map(|(s, &c)| s / c.max(1) as f64)
        .collect();
    let centered: Vec<f64> = returns
        .iter()
        .zip(&step_index)
        .map(|(g, &t)| g - baseline[t])
        .collect();
    let n = centered.len() as f64;
    let std = (centered.iter().map(|a| a * a).sum::<f64>() / n).sqrt();
    let scale = if std > 1e-8 { std } else { 1.0 };
    let advantages: Vec<f64> = centered.iter().map(|a| a / scale).collect();

    let (loss, grads, _) = policy.net().batch_gradient(
        &states,
        |b, out| GaussianHead::pg(out, &actions[b], advantages[b], entropy_coef),
        Mode::Eval,
        None,
    )?;
    if !loss.is_finite() {
        return Err(Error::Numerical("non-finite policy gradient loss".into()));
    }
    adam_step_mlp(policy.net_mut(), opt, &grads)?;
    Ok(loss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReinforceConfig {
    pub n_iters: usize,
    /// Transitions gathered per iteration (full episodes, then truncation-free).
    pub rollout_transitions: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub entropy_coef: f64,
    pub hidden: Vec<usize>,
}

impl Default for ReinforceConfig {
    fn default() -> Self {
        ReinforceConfig {
            n_iters: 150,
            rollout_transitions: 500,
            gamma: 0.995,
            learning_rate: 3e-4,
            entropy_coef: 1e-3,
            hidden: vec![100, 100],
        }
    }
}

/// Trains a policy on the true environment reward, capturing snapshots at the
/// requested fractions of the run (fraction 1.0 is the final policy).
pub fn train_reinforce<E>(
    env: &E,
    cfg: &ReinforceConfig,
    snapshot_fractions: &[f64],
    seed: u64,
) -> Result<(GaussianPolicy, Vec<PolicySnapshot>)>
where
    E: Environment + ?Sized,
{
    if cfg.n_iters == 0 {
        return Err(Error::rejected("train_reinforce needs n_iters >= 1"));
    }
    for &f in snapshot_fractions {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::rejected(format!(
                "snapshot fractions must be in (0, 1], got {f}"
            )));
        }
    }
    let mut policy = GaussianPolicy::new(
        env.state_dim(),
        env.action_dim(),
        &cfg.hidden,
        Some((env.action_low().to_vec(), env.action_high().to_vec())),
        derive_seed(seed, "rl-init"),
    )?;
    let mut opt = AdamState::new(cfg.learning_rate, policy.net().param_count())?;
    let mut snapshots = Vec::new();

    for iter in 0..cfg.n_iters {
        let episodes = collect_on_policy(&policy, env, cfg.rollout_transitions, seed, iter);
        policy_gradient_step(&mut policy, &episodes, cfg.gamma, cfg.entropy_coef, &mut opt)?;
        let done = iter + 1;
        for &f in snapshot_fractions {
            let target = ((f * cfg.n_iters as f64).round() as usize).max(1);
            if target == done {
                snapshots.push(PolicySnapshot {
                    fraction: f,
                    policy: policy.clone(),
                });
            }
        }
    }
    Ok((policy, snapshots))
}

/// Full on-policy episodes until at least `min_transitions` are collected,
/// recording both raw and executed actions.
pub(crate) fn collect_on_policy<E>(
    policy: &GaussianPolicy,
    env: &E,
    min_transitions: usize,
    seed: u64,
    iter: usize,
) -> Vec<Vec<OnPolicyStep>>
where
    E: Environment + ?Sized,
{
    let mut episodes = Vec::new();
    let mut total = 0;
    let mut e = 0u64;
    while total < min_transitions {
        let ep_seed = derive_indexed(seed, "on-policy", (iter as u64) << 32 | e);
        let mut rng = rng_from_seed(ep_seed);
        let mut state = env.reset(&mut rng);
        let mut ep = Vec::with_capacity(env.horizon());
        for _ in 0..env.horizon() {
            let (raw, executed) = policy
                .sample_raw(&state, &mut rng)
                .expect("policy dims match env");
            let (next, reward) = env.step(&state, &executed);
            ep.push(OnPolicyStep {
                state,
                action: raw,
                executed,
                reward,
            });
            state = next;
        }
        total += ep.len();
        episodes.push(ep);
        e += 1;
    }
    episodes
}
