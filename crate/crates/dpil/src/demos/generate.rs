//! Demonstration collection: optimal rollouts, Gaussian action-noise
//! corruption, early-checkpoint demos, and mixing.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::envs::{rollout_episode, ActionSource, Environment};
use crate::error::{Error, Result};
use crate::imitation::PolicySnapshot;
use crate::seed::derive_indexed;

use super::types::{DemoSet, GeneratorMeta, Transition};

/// Rolls out full episodes until at least `n_transitions` are gathered, then
/// truncates to exactly that count. Episode `e` uses a stream derived from
/// `(seed, e)`.
pub fn collect_demos<P, E>(
    policy: &P,
    env: &E,
    n_transitions: usize,
    seed: u64,
    label: &str,
) -> Result<DemoSet>
where
    P: ActionSource + ?Sized,
    E: Environment + ?Sized,
{
    if n_transitions == 0 {
        return Err(Error::rejected("n_transitions must be >= 1"));
    }
    let mut set = DemoSet::new(env.state_dim(), env.action_dim(), label, GeneratorMeta::None);
    let mut episode = 0u64;
    while set.transitions.len() < n_transitions {
        let steps = rollout_episode(policy, env, derive_indexed(seed, "collect-episode", episode));
        for (i, s) in steps.into_iter().enumerate() {
            if set.transitions.len() == n_transitions {
                break;
            }
            set.transitions.push(Transition {
                episode_id: episode,
                step_index: i as u64,
                state: s.state,
                action: s.action,
                reward: Some(s.reward),
            });
        }
        episode += 1;
    }
    set.validate()?;
    Ok(set)
}

/// Wraps a policy with additive Gaussian action noise `a = a* + delta * eta`.
/// With bounds attached the noisy action is clipped per dimension; with
/// `delta = 0` the base action passes through untouched (no rng draw).
#[derive(Debug, Clone)]
pub struct NoisyPolicyWrapper<P> {
    base: P,
    delta: f64,
    bounds: Option<(Vec<f64>, Vec<f64>)>,
}

pub fn wrap_noisy<P: ActionSource>(policy: P, delta: f64) -> Result<NoisyPolicyWrapper<P>> {
    if delta < 0.0 || !delta.is_finite() {
        return Err(Error::rejected(format!(
            "noise delta must be >= 0, got {delta}"
        )));
    }
    Ok(NoisyPolicyWrapper {
        base: policy,
        delta,
        bounds: None,
    })
}

impl<P: ActionSource> NoisyPolicyWrapper<P> {
    pub fn with_bounds(mut self, low: Vec<f64>, high: Vec<f64>) -> Self {
        self.bounds = Some((low, high));
        self
    }

    pub fn for_env<E: Environment + ?Sized>(policy: P, delta: f64, env: &E) -> Result<Self> {
        Ok(wrap_noisy(policy, delta)?
            .with_bounds(env.action_low().to_vec(), env.action_high().to_vec()))
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl<P: ActionSource> ActionSource for NoisyPolicyWrapper<P> {
    fn act(&self, state: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut action = self.base.act(state, rng);
        if self.delta == 0.0 {
            return action;
        }
        for a in action.iter_mut() {
            let eta: f64 = StandardNormal.sample(rng);
            *a += self.delta * eta;
        }
        if let Some((low, high)) = &self.bounds {
            for (i, a) in action.iter_mut().enumerate() {
                *a = a.max(low[i]).min(high[i]);
            }
        }
        action
    }
}

/// Demos rolled out from a partially trained policy snapshot. The requested
/// fraction must match one of the recorded snapshots.
pub fn collect_checkpoint_demos<E>(
    history: &[PolicySnapshot],
    fraction: f64,
    env: &E,
    n_transitions: usize,
    seed: u64,
) -> Result<DemoSet>
where
    E: Environment + ?Sized,
{
    let snap = history
        .iter()
        .find(|s| (s.fraction - fraction).abs() < 1e-9)
        .ok_or_else(|| {
            Error::rejected(format!(
                "no snapshot at training fraction {fraction}; have {:?}",
                history.iter().map(|s| s.fraction).collect::<Vec<_>>()
            ))
        })?;
    let mut set = collect_demos(
        &snap.policy,
        env,
        n_transitions,
        seed,
        &format!("ckpt-{fraction}"),
    )?;
    set.generator_meta = GeneratorMeta::Checkpoint { fraction };
    Ok(set)
}

/// Concatenates sets with re-indexed episode ids. Per-set provenance
/// (label and transition count) is retained in the metadata.
pub fn mix_demosets(sets: &[DemoSet]) -> Result<DemoSet> {
    let first = sets
        .first()
        .ok_or_else(|| Error::rejected("mix_demosets needs at least one set"))?;
    for s in sets {
        if s.state_dim != first.state_dim {
            return Err(Error::dim("mixed state_dim", first.state_dim, s.state_dim));
        }
        if s.action_dim != first.action_dim {
            return Err(Error::dim("mixed action_dim", first.action_dim, s.action_dim));
        }
    }
    let sources = sets
        .iter()
        .map(|s| (s.source_label.clone(), s.len()))
        .collect();
    let mut out = DemoSet::new(
        first.state_dim,
        first.action_dim,
        "mixed",
        GeneratorMeta::Mixed { sources },
    );
    let mut next_episode = 0u64;
    for s in sets {
        for range in s.episodes() {
            for t in &s.transitions[range] {
                let mut t = t.clone();
                t.episode_id = next_episode;
                out.transitions.push(t);
            }
            next_episode += 1;
        }
    }
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{clip, evaluate_policy, ActionSource, PointReach};
    use crate::seed::rng_from_seed;

    #[test]
    fn collect_is_deterministic() {
        let env = PointReach::default_desk();
        let ctrl = env.optimal_policy();
        let a = collect_demos(&ctrl, &env, 120, 5, "optimal").unwrap();
        let b = collect_demos(&ctrl, &env, 120, 5, "optimal").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn collect_single_transition() {
        let env = PointReach::default_desk();
        let ctrl = env.optimal_policy();
        let set = collect_demos(&ctrl, &env, 1, 0, "one").unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.transitions[0].step_index, 0);
        assert!(set.transitions[0].reward.is_some());
    }

    #[test]
    fn optimal_return_matches_closed_form_rollout() {
        // Independent oracle: replay the controller's per-dimension
        // recursion s' = s + dt clip(k (g - s)) and sum -|s - g| rewards.
        let env = PointReach::default_desk();
        let ctrl = env.optimal_policy();
        let set = collect_demos(&ctrl, &env, 500, 7, "optimal").unwrap();
        let goal = env.goal();
        let (dt, k, h) = (0.1, 5.0, 50);
        let mut oracle_total = 0.0;
        let mut episodes = 0;
        for range in set.episodes() {
            if range.len() < h {
                continue; // skip the truncated tail episode
            }
            let start = set.transitions[range.start].state.clone();
            let mut s = [start[0], start[1]];
            let mut ret = 0.0;
            for _ in 0..h {
                ret -= ((s[0] - goal[0]).powi(2) + (s[1] - goal[1]).powi(2)).sqrt();
                for d in 0..2 {
                    s[d] += dt * clip(k * (goal[d] - s[d]), -1.0, 1.0);
                }
            }
            oracle_total += ret;
            episodes += 1;
        }
        let oracle_mean = oracle_total / episodes as f64;
        let observed = set.mean_episode_return();
        let rel = ((observed - oracle_mean) / oracle_mean).abs();
        assert!(rel < 0.02, "observed {observed}, oracle {oracle_mean}");
    }

    #[test]
    fn zero_delta_wrapper_is_identity() {
        let env = PointReach::default_desk();
        let ctrl = env.optimal_policy();
        let wrapped = wrap_noisy(env.optimal_policy(), 0.0).unwrap();
        let mut r1 = rng_from_seed(4);
        let mut r2 = rng_from_seed(4);
        for s in [[0.1, 0.2], [-0.9, 0.4]] {
            assert_eq!(ctrl.act(&s, &mut r1), wrapped.act(&s, &mut r2));
        }
    }

    #[test]
    fn negative_delta_rejected() {
        let env = PointReach::default_desk();
        assert!(wrap_noisy(env.optimal_policy(), -0.1).is_err());
    }

    #[test]
    fn unbounded_noise_std_matches_delta() {
        // 1e5 draws of a - a* with delta = 0.4: sample std in [0.39, 0.41].
        struct Still;
        impl ActionSource for Still {
            fn act(&self, _s: &[f64], _rng: &mut rand_chacha::ChaCha8Rng) -> Vec<f64> {
                vec![0.0]
            }
        }
        let wrapped = wrap_noisy(Still, 0.4).unwrap();
        let mut rng = rng_from_seed(99);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| wrapped.act(&[0.0], &mut rng)[0]).collect();
        let mean: f64 = draws.iter().sum::<f64>() / n as f64;
        let std =
            (draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        assert!((0.39..=0.41).contains(&std), "std = {std}");
    }

    #[test]
    fn paper_noise_levels_order_returns() {
        // D1 (0.6) < D2 (0.4) < D3 (0.25) < optimal, 100 episodes each.
        let env = PointReach::default_desk();
        let mut means = Vec::new();
        for delta in [0.6, 0.4, 0.25, 0.0] {
            let noisy = NoisyPolicyWrapper::for_env(env.optimal_policy(), delta, &env).unwrap();
            let est = evaluate_policy(&noisy, &env, 100, 0.995, 11).unwrap();
            means.push(est.mean_undiscounted);
        }
        assert!(means[0] < means[1], "{means:?}");
        assert!(means[1] < means[2], "{means:?}");
        assert!(means[2] < means[3], "{means:?}");
    }

    #[test]
    fn mix_concatenates_and_reindexes() {
        let env = PointReach::default_desk();
        let ctrl = env.optimal_policy();
        let a = collect_demos(&ctrl, &env, 100, 1, "a").unwrap();
        let b = collect_demos(&ctrl, &env, 200, 2, "b").unwrap();
        let c = collect_demos(&ctrl, &env, 300, 3, "c").unwrap();
        let mixed = mix_demosets(&[a.clone(), b, c]).unwrap();
        assert_eq!(mixed.len(), 600);
        assert_eq!(mixed.source_label, "mixed");
        match &mixed.generator_meta {
            GeneratorMeta::Mixed { sources } => {
                assert_eq!(
                    sources,
                    &vec![("a".into(), 100), ("b".into(), 200), ("c".into(), 300)]
                );
            }
            other => panic!("unexpected meta {other:?}"),
        }
        mixed.validate().unwrap();
        // Single-set mix: identical transitions modulo episode renumbering.
        let solo = mix_demosets(&[a.clone()]).unwrap();
        assert_eq!(solo.len(), a.len());
        for (x, y) in solo.transitions.iter().zip(&a.transitions) {
            assert_eq!(x.state, y.state);
            assert_eq!(x.action, y.action);
        }
    }

    #[test]
    fn mix_rejects_dim_mismatch() {
        let a = crate::demos::DemoSet::new(2, 2, "a", GeneratorMeta::None);
        let b = crate::demos::DemoSet::new(1, 2, "b", GeneratorMeta::None);
        assert!(mix_demosets(&[a, b]).is_err());
    }

    #[test]
    fn checkpoint_demos_need_matching_fraction() {
        let env = PointReach::default_desk();
        let history = vec![];
        let err = collect_checkpoint_demos(&history, 0.3, &env, 10, 0).unwrap_err();
        assert!(err.to_string().contains("0.3"));
    }
}
