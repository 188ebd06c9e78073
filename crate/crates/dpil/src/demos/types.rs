//! Demonstration data model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::fnv1a64;

/// One state-action pair with episode bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub episode_id: u64,
    pub step_index: u64,
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: Option<f64>,
}

/// Where a demo set came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GeneratorMeta {
    None,
    /// Gaussian action noise of standard deviation `delta`.
    ActionNoise { delta: f64 },
    /// Snapshot at a fraction of an RL training run.
    Checkpoint { fraction: f64 },
    /// Concatenation of other sets; `(source_label, n_transitions)` per input.
    Mixed { sources: Vec<(String, usize)> },
}

/// An ordered collection of trajectories. Transitions are stored flat but
/// grouped: all transitions of an episode are contiguous with strictly
/// increasing `step_index` starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoSet {
    pub state_dim: usize,
    pub action_dim: usize,
    pub source_label: String,
    pub generator_meta: GeneratorMeta,
    pub transitions: Vec<Transition>,
}

impl DemoSet {
    pub fn new(
        state_dim: usize,
        action_dim: usize,
        source_label: impl Into<String>,
        generator_meta: GeneratorMeta,
    ) -> Self {
        DemoSet {
            state_dim,
            action_dim,
            source_label: source_label.into(),
            generator_meta,
            transitions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Checks dimension consistency and episode well-formedness.
    pub fn validate(&self) -> Result<()> {
        if self.state_dim == 0 || self.action_dim == 0 {
            return Err(Error::rejected("state_dim and action_dim must be positive"));
        }
        let mut last: Option<(u64, u64)> = None;
        for (k, t) in self.transitions.iter().enumerate() {
            if t.state.len() != self.state_dim {
                return Err(Error::dim(format!("transition {k} state"), self.state_dim, t.state.len()));
            }
            if t.action.len() != self.action_dim {
                return Err(Error::dim(
                    format!("transition {k} action"),
                    self.action_dim,
                    t.action.len(),
                ));
            }
            match last {
                Some((ep, step)) if ep == t.episode_id => {
                    if t.step_index != step + 1 {
                        return Err(Error::rejected(format!(
                            "episode {ep} has non-consecutive step {} after {step}",
                            t.step_index
                        )));
                    }
                }
                _ => {
                    if t.step_index != 0 {
                        return Err(Error::rejected(format!(
                            "episode {} starts at step {} instead of 0",
                            t.episode_id, t.step_index
                        )));
                    }
                }
            }
            last = Some((t.episode_id, t.step_index));
        }
        Ok(())
    }

    /// Flat `concat(state, action)` rows, the diffusion latent.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.transitions
            .iter()
            .map(|t| {
                let mut row = Vec::with_capacity(self.state_dim + self.action_dim);
                row.extend_from_slice(&t.state);
                row.extend_from_slice(&t.action);
                row
            })
            .collect()
    }

    /// Contiguous transition ranges, one per episode, in storage order.
    pub fn episodes(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..=self.transitions.len() {
            let boundary = k == self.transitions.len()
                || self.transitions[k].episode_id != self.transitions[start].episode_id;
            if boundary {
                out.push(start..k);
                start = k;
            }
        }
        out
    }

    /// Mean per-episode sum of recorded rewards (NaN if any reward missing).
    pub fn mean_episode_return(&self) -> f64 {
        let eps = self.episodes();
        if eps.is_empty() {
            return f64::NAN;
        }
        let total: f64 = eps
            .iter()
            .map(|range| {
                self.transitions[range.clone()]
                    .iter()
                    .map(|t| t.reward.unwrap_or(f64::NAN))
                    .sum::<f64>()
            })
            .sum();
        total / eps.len() as f64
    }

    /// Stable content hash over dims and every float bit pattern.
    pub fn content_hash(&self) -> u64 {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&(self.state_dim as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.action_dim as u64).to_le_bytes());
        for t in &self.transitions {
            bytes.extend_from_slice(&t.episode_id.to_le_bytes());
            bytes.extend_from_slice(&t.step_index.to_le_bytes());
            for v in t.state.iter().chain(&t.action) {
                bytes.extend_from_slice(&v.to_bits().to_le_bytes());
            }
            if let Some(r) = t.reward {
                bytes.extend_from_slice(&r.to_bits().to_le_bytes());
            }
        }
        fnv1a64(&bytes)
    }
}
