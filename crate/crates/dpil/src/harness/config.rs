//! Run configuration: one JSON file describing the whole experiment.
//!
//! Every field has a default; the diffusion and learner defaults are the
//! published hyperparameters (T = 1000, linear betas 1e-4 to 0.02, denoiser
//! lr 1e-4, five layers, dropout 0.2; BC batch 256 over 1000 epochs; five
//! discriminator updates per policy update at lr 3e-4; gamma 0.995). Test
//! configs shrink epochs and T to keep runtimes in seconds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diffusion::DenoiserTrainConfig;
use crate::envs::{ActionSource, Environment, LinearTrack, PointReach};
use crate::error::{Error, Result};
use crate::eval::SweepConfig;
use crate::imitation::{BcConfig, GailConfig};
use crate::seed::fnv1a64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub out_dir: String,
    pub env: EnvConfig,
    pub demos: DemosConfig,
    pub diffusion: DiffusionConfig,
    pub purify: PurifySection,
    pub learner: LearnerConfig,
    pub eval: EvalSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            workers: 1,
            out_dir: "runs/dpil".into(),
            env: EnvConfig::default(),
            demos: DemosConfig::default(),
            diffusion: DiffusionConfig::default(),
            purify: PurifySection::default(),
            learner: LearnerConfig::default(),
            eval: EvalSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    /// "point_reach" or "linear_track".
    pub kind: String,
    pub goal: Vec<f64>,
    pub dt: f64,
    pub gain: f64,
    pub horizon: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            kind: "point_reach".into(),
            goal: vec![0.5, 0.5],
            dt: 0.1,
            gain: 5.0,
            horizon: 50,
        }
    }
}

/// An instantiated environment plus its analytic optimal controller.
pub struct BuiltEnv {
    pub env: Box<dyn Environment + Send + Sync>,
    pub optimal: Box<dyn ActionSource + Send + Sync>,
}

impl EnvConfig {
    pub fn build(&self) -> Result<BuiltEnv> {
        match self.kind.as_str() {
            "point_reach" => {
                if self.goal.len() != 2 {
                    return Err(Error::dim("env.goal", 2, self.goal.len()));
                }
                let env = PointReach::new(
                    [self.goal[0], self.goal[1]],
                    self.dt,
                    self.gain,
                    self.horizon,
                )?;
                let optimal = env.optimal_policy();
                Ok(BuiltEnv {
                    env: Box::new(env),
                    optimal: Box::new(optimal),
                })
            }
            "linear_track" => {
                if self.goal.len() != 1 {
                    return Err(Error::dim("env.goal", 1, self.goal.len()));
                }
                let env = LinearTrack::new(self.goal[0], self.dt, self.gain, self.horizon)?;
                let optimal = env.optimal_policy();
                Ok(BuiltEnv {
                    env: Box::new(env),
                    optimal: Box::new(optimal),
                })
            }
            other => Err(Error::rejected(format!("unknown env kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemosConfig {
    /// Optimal transitions for diffusion training.
    pub n_optimal: usize,
    /// Imperfect transitions per noisy dataset.
    pub n_imperfect: usize,
    /// Action-noise levels; each delta yields a dataset labeled `d{delta}`.
    pub deltas: Vec<f64>,
    /// When non-empty, an RL run is trained and `ckpt-{f}` datasets are
    /// collected from the snapshot at each fraction.
    pub checkpoint_fractions: Vec<f64>,
    /// Also build the concatenation of all delta datasets, labeled "mixed".
    pub include_mixed: bool,
}

impl Default for DemosConfig {
    fn default() -> Self {
        DemosConfig {
            n_optimal: 50,
            n_imperfect: 500,
            deltas: vec![0.6, 0.4, 0.25],
            checkpoint_fractions: vec![],
            include_mixed: true,
        }
    }
}

pub fn delta_label(delta: f64) -> String {
    format!("d{delta}")
}

pub fn checkpoint_label(fraction: f64) -> String {
    format!("ckpt-{fraction}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffusionConfig {
    pub t_max: usize,
    pub beta_1: f64,
    pub beta_t: f64,
    pub train: DenoiserTrainConfig,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            t_max: 1000,
            beta_1: 1e-4,
            beta_t: 0.02,
            train: DenoiserTrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PurifySection {
    pub enabled: bool,
    pub t_star: f64,
    pub noise_at_final_step: bool,
    /// When set, the eval stage sweeps these purification times.
    pub sweep_grid: Option<Vec<f64>>,
    pub sweep_seeds: usize,
}

impl Default for PurifySection {
    fn default() -> Self {
        PurifySection {
            enabled: true,
            t_star: 0.1,
            noise_at_final_step: false,
            sweep_grid: None,
            sweep_seeds: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    /// "bc" or "gail".
    pub kind: String,
    /// Imperfect datasets to train on (labels like "d0.6", "mixed").
    pub datasets: Vec<String>,
    pub bc: BcConfig,
    pub gail: GailConfig,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            kind: "bc".into(),
            datasets: vec!["d0.6".into()],
            bc: BcConfig::default(),
            gail: GailConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSection {
    pub mmd: bool,
    /// Samples per set for MMD tables (the optimal reference set is this
    /// size too).
    pub n_mmd_samples: usize,
    pub n_eval_episodes: usize,
    pub gamma: f64,
    /// Pairs of policy names whose per-episode returns are Welch-tested
    /// (one-sided, H1: mean(a) > mean(b)).
    pub ttest_pairs: Vec<(String, String)>,
    pub decay_curve: bool,
    pub decay_t_grid: Vec<f64>,
    pub decay_samples: usize,
    pub decay_permutations: usize,
    pub filter_baselines: bool,
    pub filter_window: usize,
    pub filter_sigma: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            mmd: true,
            n_mmd_samples: 500,
            n_eval_episodes: 10,
            gamma: 0.995,
            ttest_pairs: vec![("dp_bc:d0.6".into(), "bc_all:d0.6".into())],
            decay_curve: false,
            decay_t_grid: (1..=10).map(|k| k as f64 / 10.0).collect(),
            decay_samples: 256,
            decay_permutations: 50,
            filter_baselines: false,
            filter_window: 5,
            filter_sigma: 1.0,
        }
    }
}

impl RunConfig {
    /// Dataset labels the demos stage will generate.
    pub fn dataset_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.demos.deltas.iter().map(|&d| delta_label(d)).collect();
        if self.demos.include_mixed && self.demos.deltas.len() > 1 {
            labels.push("mixed".into());
        }
        for &f in &self.demos.checkpoint_fractions {
            labels.push(checkpoint_label(f));
        }
        labels
    }

    /// Semantic validation; returns every problem found.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.workers == 0 {
            errors.push("workers: must be >= 1".into());
        }
        if self.out_dir.is_empty() {
            errors.push("out_dir: must not be empty".into());
        }
        match self.env.kind.as_str() {
            "point_reach" | "linear_track" => {}
            other => errors.push(format!("env.kind: unknown environment {other:?}")),
        }
        if self.env.dt <= 0.0 {
            errors.push(format!("env.dt: must be > 0, got {}", self.env.dt));
        }
        if self.env.horizon == 0 {
            errors.push("env.horizon: must be >= 1".into());
        }
        if self.env.gain <= 0.0 {
            errors.push(format!("env.gain: must be > 0, got {}", self.env.gain));
        }
        if self.demos.n_optimal == 0 {
            errors.push("demos.n_optimal: must be >= 1".into());
        }
        if self.demos.n_imperfect == 0 {
            errors.push("demos.n_imperfect: must be >= 1".into());
        }
        for &d in &self.demos.deltas {
            if d < 0.0 || !d.is_finite() {
                errors.push(format!("demos.deltas: noise level must be >= 0, got {d}"));
            }
        }
        for &f in &self.demos.checkpoint_fractions {
            if !(f > 0.0 && f <= 1.0) {
                errors.push(format!(
                    "demos.checkpoint_fractions: fraction must be in (0, 1], got {f}"
                ));
            }
        }
        if self.diffusion.t_max == 0 {
            errors.push("diffusion.t_max: must be >= 1".into());
        }
        if !(self.diffusion.beta_1 > 0.0
            && self.diffusion.beta_1 <= self.diffusion.beta_t
            && self.diffusion.beta_t < 1.0)
        {
            errors.push(format!(
                "diffusion.beta_1/beta_t: need 0 < beta_1 <= beta_T < 1, got ({}, {})",
                self.diffusion.beta_1, self.diffusion.beta_t
            ));
        }
        if self.diffusion.train.epochs == 0 {
            errors.push("diffusion.train.epochs: must be >= 1".into());
        }
        if !(self.purify.t_star > 0.0 && self.purify.t_star <= 1.0) {
            errors.push(format!(
                "purify.t_star: must be in (0, 1], got {}",
                self.purify.t_star
            ));
        }
        if let Some(grid) = &self.purify.sweep_grid {
            if grid.is_empty() {
                errors.push("purify.sweep_grid: must be non-empty when set".into());
            }
            for &t in grid {
                if !(t > 0.0 && t <= 1.0) {
                    errors.push(format!("purify.sweep_grid: value must be in (0, 1], got {t}"));
                }
            }
            if self.purify.sweep_seeds == 0 {
                errors.push("purify.sweep_seeds: must be >= 1".into());
            }
        }
        match self.learner.kind.as_str() {
            "bc" | "gail" => {}
            other => errors.push(format!("learner.kind: must be \"bc\" or \"gail\", got {other:?}")),
        }
        let labels = self.dataset_labels();
        for ds in &self.learner.datasets {
            if !labels.contains(ds) {
                errors.push(format!(
                    "learner.datasets: {ds:?} is not generated by the demos stage (have {labels:?})"
                ));
            }
        }
        if self.learner.bc.epochs == 0 || self.learner.bc.batch_size == 0 {
            errors.push("learner.bc: epochs and batch_size must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.learner.gail.gamma) {
            errors.push(format!(
                "learner.gail.gamma: discount must be in [0, 1), got {}",
                self.learner.gail.gamma
            ));
        }
        if !(0.0..1.0).contains(&self.eval.gamma) {
            errors.push(format!(
                "eval.gamma: discount must be in [0, 1), got {}",
                self.eval.gamma
            ));
        }
        if self.eval.n_eval_episodes == 0 {
            errors.push("eval.n_eval_episodes: must be >= 1".into());
        }
        if self.eval.mmd && self.eval.n_mmd_samples < 2 {
            errors.push("eval.n_mmd_samples: must be >= 2".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errors))
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        super::report::write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    /// Stable hash of the canonical JSON encoding; recorded as provenance.
    /// The output directory and worker count are excluded: neither may
    /// influence results, so reports from different directories or worker
    /// counts stay byte-comparable.
    pub fn content_hash(&self) -> u64 {
        let mut canonical = self.clone();
        canonical.out_dir = String::new();
        canonical.workers = 1;
        fnv1a64(
            serde_json::to_string(&canonical)
                .expect("config serializes")
                .as_bytes(),
        )
    }

    /// Sweep configuration derived from the purify and learner blocks.
    pub fn sweep_config(&self, bounds: (Vec<f64>, Vec<f64>)) -> Option<SweepConfig> {
        self.purify.sweep_grid.as_ref().map(|grid| {
            let mut bc = self.learner.bc.clone();
            bc.action_bounds = Some(bounds);
            SweepConfig {
                t_grid: grid.clone(),
                n_seeds: self.purify.sweep_seeds,
                bc,
                n_eval_episodes: self.eval.n_eval_episodes,
                eval_gamma: self.eval.gamma,
                workers: self.workers,
            }
        })
    }
}

/// Parses and validates a config file, accumulating every semantic error.
pub fn validate_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
        Error::Validation(vec![format!("config parse error: {e}")])
    })?;
    cfg.validate()?;
    Ok(cfg)
}
