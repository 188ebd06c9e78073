//! Toy continuous-control environments with analytic optimal controllers.

pub mod linear_track;
pub mod point_reach;
pub mod rollout;

use rand_chacha::ChaCha8Rng;

pub use linear_track::{LinearTrack, LinearTrackController};
pub use point_reach::{PointReach, PointReachController};
pub use rollout::{evaluate_policy, rollout_episode, EpisodeStep, PolicyValueEstimate};

/// Anything that can emit an action for a state. Deterministic controllers
/// ignore the rng.
pub trait ActionSource {
    fn act(&self, state: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64>;
}

impl<P: ActionSource + ?Sized> ActionSource for &P {
    fn act(&self, state: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        (**self).act(state, rng)
    }
}

impl<P: ActionSource + ?Sized> ActionSource for Box<P> {
    fn act(&self, state: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
        (**self).act(state, rng)
    }
}

/// A finite-horizon MDP with box action bounds, a bounded reward, and a
/// seeded initial-state distribution. Dynamics here are deterministic; the
/// trait keeps state transitions pure so environments are cheap value
/// objects shared across workers.
pub trait Environment {
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn action_low(&self) -> &[f64];
    fn action_high(&self) -> &[f64];
    fn horizon(&self) -> usize;
    /// Declared reward bound: every step asserts `|r| <= r_max`.
    fn r_max(&self) -> f64;
    fn reset(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    /// Returns `(next_state, reward)` for taking `action` in `state`.
    fn step(&self, state: &[f64], action: &[f64]) -> (Vec<f64>, f64);
}

pub(crate) fn clip(v: f64, low: f64, high: f64) -> f64 {
    v.max(low).min(high)
}
