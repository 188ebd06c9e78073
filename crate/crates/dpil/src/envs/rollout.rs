//! Episode rollout and policy value estimation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{derive_indexed, rng_from_seed};

use super::{ActionSource, Environment};

#[derive(Debug, Clone)]
pub struct EpisodeStep {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
}

/// Rolls one full episode (horizon steps) under `policy`.
pub fn rollout_episode<P, E>(policy: &P, env: &E, seed: u64) -> Vec<EpisodeStep>
where
    P: ActionSource + ?Sized,
    E: Environment + ?Sized,
{
    let mut rng = rng_from_seed(seed);
    let mut state = env.reset(&mut rng);
    let mut steps = Vec::with_capacity(env.horizon());
    for _ in 0..env.horizon() {
        let action = policy.act(&state, &mut rng);
        let (next, reward) = env.step(&state, &action);
        steps.push(EpisodeStep {
            state,
            action,
            reward,
        });
        state = next;
    }
    steps
}

/// Monte-Carlo policy value over full episodes. The undiscounted mean is the
/// reported headline metric; `stderr` is the standard error of the
/// undiscounted per-episode returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyValueEstimate {
    pub mean_discounted: f64,
    pub mean_undiscounted: f64,
    pub stderr: f64,
    pub n_episodes: usize,
    pub gamma: f64,
}

impl PolicyValueEstimate {
    /// Per-episode undiscounted returns are kept alongside the summary so
    /// t-tests can consume them directly.
    pub fn from_returns(discounted: &[f64], undiscounted: &[f64], gamma: f64) -> Self {
        let n = undiscounted.len();
        let mean_u = mean(undiscounted);
        let stderr = if n > 1 {
            let var = undiscounted
                .iter()
                .map(|r| (r - mean_u) * (r - mean_u))
                .sum::<f64>()
                / (n as f64 - 1.0);
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        PolicyValueEstimate {
            mean_discounted: mean(discounted),
            mean_undiscounted: mean_u,
            stderr,
            n_episodes: n,
            gamma,
        }
    }
}

/// Estimates the policy value over `n_episodes` episodes. Episode `e` uses a
/// stream derived from `(seed, e)`, so estimates are reproducible and
/// independent of evaluation order.
pub fn evaluate_policy<P, E>(
    policy: &P,
    env: &E,
    n_episodes: usize,
    gamma: f64,
    seed: u64,
) -> Result<PolicyValueEstimate>
where
    P: ActionSource + ?Sized,
    E: Environment + ?Sized,
{
    if n_episodes == 0 {
        return Err(Error::rejected("n_episodes must be >= 1"));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::rejected(format!(
            "gamma must be in [0, 1), got {gamma}"
        )));
    }
    let (discounted, undiscounted) = episode_returns(policy, env, n_episodes, gamma, seed);
    Ok(PolicyValueEstimate::from_returns(
        &discounted,
        &undiscounted,
        gamma,
    ))
}

/// Raw per-episode returns; used by evaluate_policy and by the Welch t-test
/// comparisons that need the samples rather than the summary.
pub fn episode_returns<P, E>(
    policy: &P,
    env: &E,
    n_episodes: usize,
    gamma: f64,
    seed: u64,
) -> (Vec<f64>, Vec<f64>)
where
    P: ActionSource + ?Sized,
    E: Environment + ?Sized,
{
    let mut discounted = Vec::with_capacity(n_episodes);
    let mut undiscounted = Vec::with_capacity(n_episodes);
    for e in 0..n_episodes {
        let steps = rollout_episode(policy, env, derive_indexed(seed, "episode", e as u64));
        let mut disc = 0.0;
        let mut flat = 0.0;
        let mut g = 1.0;
        for s in &steps {
            disc += g * s.reward;
            flat += s.reward;
            g *= gamma;
        }
        discounted.push(disc);
        undiscounted.push(flat);
    }
    (discounted, undiscounted)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}
