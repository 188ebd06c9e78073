//! 2-D point-mass goal reaching.
//!
//! State is a position in the plane, actions are velocities clipped to
//! `[-1, 1]^2`, dynamics are `s' = s + a * dt`, and the reward is the negated
//! Euclidean distance to the goal at the current state. The optimal policy is
//! the proportional controller `a*(s) = clip(k (goal - s))`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{clip, ActionSource, Environment};

#[derive(Debug, Clone)]
pub struct PointReach {
    goal: [f64; 2],
    dt: f64,
    gain: f64,
    horizon: usize,
    action_low: [f64; 2],
    action_high: [f64; 2],
    r_max: f64,
}

impl PointReach {
    pub fn new(goal: [f64; 2], dt: f64, gain: f64, horizon: usize) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::rejected(format!("dt must be > 0, got {dt}")));
        }
        if horizon == 0 {
            return Err(Error::rejected("horizon must be >= 1"));
        }
        if gain <= 0.0 {
            return Err(Error::rejected(format!("gain must be > 0, got {gain}")));
        }
        // Farthest reachable point: worst start corner plus H full-speed steps.
        let corner_dist = [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
            .iter()
            .map(|&(x, y): &(f64, f64)| ((x - goal[0]).powi(2) + (y - goal[1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        let r_max = corner_dist + horizon as f64 * dt * 2f64.sqrt();
        Ok(PointReach {
            goal,
            dt,
            gain,
            horizon,
            action_low: [-1.0, -1.0],
            action_high: [1.0, 1.0],
            r_max,
        })
    }

    /// Defaults used throughout the test suite: goal (0.5, 0.5), dt 0.1,
    /// gain 5, horizon 50.
    pub fn default_desk() -> Self {
        PointReach::new([0.5, 0.5], 0.1, 5.0, 50).unwrap()
    }

    pub fn goal(&self) -> [f64; 2] {
        self.goal
    }

    pub fn optimal_policy(&self) -> PointReachController {
        PointReachController {
            goal: self.goal,
            gain: self.gain,
        }
    }
}

impl Environment for PointReach {
    fn state_dim(&self) -> usize {
        2
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn action_low(&self) -> &[f64] {
        &self.action_low
    }

    fn action_high(&self) -> &[f64] {
        &self.action_high
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn r_max(&self) -> f64 {
        self.r_max
    }

    fn reset(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)]
    }

    fn step(&self, state: &[f64], action: &[f64]) -> (Vec<f64>, f64) {
        debug_assert_eq!(state.len(), 2);
        debug_assert_eq!(action.len(), 2);
        let ax = clip(action[0], -1.0, 1.0);
        let ay = clip(action[1], -1.0, 1.0);
        let next = vec![state[0] + ax * self.dt, state[1] + ay * self.dt];
        let reward =
            -((state[0] - self.goal[0]).powi(2) + (state[1] - self.goal[1]).powi(2)).sqrt();
        assert!(
            reward.abs() <= self.r_max,
            "reward {reward} exceeded declared bound {}",
            self.r_max
        );
        (next, reward)
    }
}

/// The analytic optimal controller `a*(s) = clip(k (goal - s))`.
#[derive(Debug, Clone)]
pub struct PointReachController {
    goal: [f64; 2],
    gain: f64,
}

impl ActionSource for PointReachController {
    fn act(&self, state: &[f64], _rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![
            clip(self.gain * (self.goal[0] - state[0]), -1.0, 1.0),
            clip(self.gain * (self.goal[1] - state[1]), -1.0, 1.0),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn controller_is_zero_at_goal_and_reward_is_zero() {
        let env = PointReach::new([1.0, 0.0], 0.1, 5.0, 10).unwrap();
        let ctrl = env.optimal_policy();
        let mut rng = rng_from_seed(0);
        let a = ctrl.act(&[1.0, 0.0], &mut rng);
        assert_eq!(a, vec![0.0, 0.0]);
        let (_, r) = env.step(&[1.0, 0.0], &a);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn clip_activates_far_from_goal() {
        let env = PointReach::new([1.0, 0.0], 0.1, 50.0, 10).unwrap();
        let ctrl = env.optimal_policy();
        let mut rng = rng_from_seed(0);
        // k (goal - s) = (50, 0) clips to (1, 0).
        assert_eq!(ctrl.act(&[0.0, 0.0], &mut rng), vec![1.0, 0.0]);
    }

    #[test]
    fn dynamics_hand_step() {
        let env = PointReach::new([1.0, 0.0], 0.1, 5.0, 10).unwrap();
        let (next, _) = env.step(&[0.0, 0.0], &[1.0, 0.0]);
        assert!((next[0] - 0.1).abs() < 1e-15);
        assert_eq!(next[1], 0.0);
    }

    #[test]
    fn controller_is_deterministic() {
        let env = PointReach::default_desk();
        let ctrl = env.optimal_policy();
        let mut r1 = rng_from_seed(1);
        let mut r2 = rng_from_seed(2);
        assert_eq!(ctrl.act(&[0.2, -0.4], &mut r1), ctrl.act(&[0.2, -0.4], &mut r2));
    }
}
