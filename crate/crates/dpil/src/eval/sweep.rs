//! Purification-time sweep: purify at each t*, retrain DP-BC, evaluate.

use serde::{Deserialize, Serialize};

use crate::demos::{mix_demosets, DemoSet};
use crate::diffusion::{purify_dataset, Denoiser, PurifyConfig};
use crate::envs::{evaluate_policy, Environment};
use crate::error::{Error, Result};
use crate::imitation::{bc_train, BcConfig};
use crate::seed::derive_indexed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub t_grid: Vec<f64>,
    pub n_seeds: usize,
    pub bc: BcConfig,
    pub n_eval_episodes: usize,
    pub eval_gamma: f64,
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            t_grid: vec![0.005, 0.01, 0.03, 0.05, 0.1, 0.2],
            n_seeds: 3,
            bc: BcConfig::default(),
            n_eval_episodes: 10,
            eval_gamma: 0.995,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t_star: f64,
    pub mean_return: f64,
    pub stderr: f64,
    pub seed_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Grid point with the highest mean return (first on ties).
    pub argmax_t_star: f64,
}

/// For each t* in the grid and each seed: purify the imperfect demos, train
/// BC on purified + optimal, and estimate the policy value. Rows aggregate
/// over seeds.
pub fn t_star_sweep<E>(
    optimal: &DemoSet,
    imperfect: &DemoSet,
    denoiser: &Denoiser,
    env: &E,
    cfg: &SweepConfig,
    seed: u64,
) -> Result<SweepResult>
where
    E: Environment + ?Sized,
{
    if cfg.t_grid.is_empty() {
        return Err(Error::rejected("sweep t_grid must be non-empty"));
    }
    if cfg.n_seeds == 0 {
        return Err(Error::rejected("sweep needs n_seeds >= 1"));
    }
    let mut rows = Vec::with_capacity(cfg.t_grid.len());
    for (ti, &t_star) in cfg.t_grid.iter().enumerate() {
        let purify_cfg = PurifyConfig::new(t_star)?;
        let mut returns = Vec::with_capacity(cfg.n_seeds);
        for si in 0..cfg.n_seeds {
            let tag = (ti as u64) << 32 | si as u64;
            let purified = purify_dataset(
                imperfect,
                &purify_cfg,
                denoiser,
                derive_indexed(seed, "sweep-purify", tag),
                cfg.workers,
            )?;
            let train_set = mix_demosets(&[purified, optimal.clone()])?;
            // BC and evaluation streams depend only on the seed replica, so
            // grid points differ by the purification alone.
            let bc = bc_train(&train_set, &cfg.bc, derive_indexed(seed, "sweep-bc", si as u64))?;
            let est = evaluate_policy(
                &bc.policy,
                env,
                cfg.n_eval_episodes,
                cfg.eval_gamma,
                derive_indexed(seed, "sweep-eval", si as u64),
            )?;
            returns.push(est.mean_undiscounted);
        }
        let mean = returns.iter().sum::<f64>() / returns.len() as f64;
        let stderr = if returns.len() > 1 {
            let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>()
                / (returns.len() as f64 - 1.0);
            (var / returns.len() as f64).sqrt()
        } else {
            0.0
        };
        rows.push(SweepRow {
            t_star,
            mean_return: mean,
            stderr,
            seed_count: returns.len(),
        });
    }
    // First grid point wins ties.
    let mut best = &rows[0];
    for r in &rows[1..] {
        if r.mean_return > best.mean_return {
            best = r;
        }
    }
    let argmax_t_star = best.t_star;
    Ok(SweepResult {
        rows,
        argmax_t_star,
    })
}
