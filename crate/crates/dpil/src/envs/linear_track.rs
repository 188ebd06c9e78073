//! 1-D variant of the reaching task; handy for cheap unit tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{clip, ActionSource, Environment};

#[derive(Debug, Clone)]
pub struct LinearTrack {
    goal: f64,
    dt: f64,
    gain: f64,
    horizon: usize,
    action_low: [f64; 1],
    action_high: [f64; 1],
    r_max: f64,
}

impl LinearTrack {
    pub fn new(goal: f64, dt: f64, gain: f64, horizon: usize) -> Result<Self> {
        if dt <= 0.0 || horizon == 0 || gain <= 0.0 {
            return Err(Error::rejected("need dt > 0, horizon >= 1, gain > 0"));
        }
        let r_max = (1.0 + goal.abs()) + horizon as f64 * dt;
        Ok(LinearTrack {
            goal,
            dt,
            gain,
            horizon,
            action_low: [-1.0],
            action_high: [1.0],
            r_max,
        })
    }

    pub fn optimal_policy(&self) -> LinearTrackController {
        LinearTrackController {
            goal: self.goal,
            gain: self.gain,
        }
    }
}

impl Environment for LinearTrack {
    fn state_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        1
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
        vec![rng.gen_range(-1.0..=1.0)]
    }

    fn step(&self, state: &[f64], action: &[f64]) -> (Vec<f64>, f64) {
        let a = clip(action[0], -1.0, 1.0);
        let next = vec![state[0] + a * self.dt];
        let reward = -(state[0] - self.goal).abs();
        assert!(reward.abs() <= self.r_max);
        (next, reward)
    }
}

#[derive(Debug, Clone)]
pub struct LinearTrackController {
    goal: f64,
    gain: f64,
}

impl ActionSource for LinearTrackController {
    fn act(&self, state: &[f64], _rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![clip(self.gain * (self.goal - state[0]), -1.0, 1.0)]
    }
}
