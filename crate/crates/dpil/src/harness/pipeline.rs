//! End-to-end pipeline: generate/load demos, train the denoiser, purify,
//! train learners, evaluate, and emit the report.
//!
//! Every stage derives its seed as `derive_seed(root, stage tag)` and writes
//! its artifacts under the output directory; reruns load existing artifacts
//! instead of recomputing, so deleting a downstream checkpoint and rerunning
//! reproduces identical downstream numbers from the upstream files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::demos::{
    collect_checkpoint_demos, collect_demos, filter_denoise, load_demos, mix_demosets, save_demos,
    DemoSet, FilterKind, FilterTarget, NoisyPolicyWrapper,
};
use crate::diffusion::{
    purify_dataset, train_denoiser, Denoiser, NoiseSchedule, PurifyConfig, PurifyManifest,
};
use crate::envs::evaluate_policy;
use crate::error::{Error, Result};
use crate::eval::{
    divergence_decay_curve, mmd, t_star_sweep, welch_t_test, Bandwidth, MmdConfig, SweepResult,
};
use crate::imitation::{
    bc_train, gail_train, train_reinforce, GailIterStats, GaussianPolicy, ReinforceConfig,
};
use crate::nn::{load_checkpoint, save_checkpoint};
use crate::seed::derive_seed;

use super::config::{delta_label, BuiltEnv, RunConfig};
use super::report::{
    emit_report, EvalReport, FilterBaselineRow, MmdRow, PolicyValueRow, TtestRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StageName {
    Demos,
    Diffusion,
    Purify,
    Learner,
    Eval,
}

#[derive(Serialize, Deserialize)]
struct BcPayload {
    policy: GaussianPolicy,
    final_nll: f64,
}

#[derive(Serialize, Deserialize)]
struct GailPayload {
    policy: GaussianPolicy,
    curve: Vec<GailIterStats>,
}

pub struct Pipeline {
    cfg: RunConfig,
    out_dir: PathBuf,
    built: BuiltEnv,
    report: EvalReport,
    demo_sets: BTreeMap<String, DemoSet>,
    denoiser: Option<Denoiser>,
    purified: BTreeMap<String, DemoSet>,
    policies: BTreeMap<String, GaussianPolicy>,
    gail_curves: BTreeMap<String, Vec<GailIterStats>>,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let built = cfg.env.build()?;
        let out_dir = PathBuf::from(&cfg.out_dir);
        let mut report = EvalReport::default();
        report
            .provenance
            .insert("config_hash".into(), format!("{:016x}", cfg.content_hash()));
        report.provenance.insert("seed".into(), cfg.seed.to_string());
        Ok(Pipeline {
            cfg,
            out_dir,
            built,
            report,
            demo_sets: BTreeMap::new(),
            denoiser: None,
            purified: BTreeMap::new(),
            policies: BTreeMap::new(),
            gail_curves: BTreeMap::new(),
        })
    }

    pub fn cfg(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn demo_set(&self, label: &str) -> Result<&DemoSet> {
        self.demo_sets
            .get(label)
            .ok_or_else(|| Error::rejected(format!("demo set {label:?} not generated")))
    }

    pub fn purified_set(&self, label: &str) -> Option<&DemoSet> {
        self.purified.get(label)
    }

    pub fn denoiser(&self) -> Result<&Denoiser> {
        self.denoiser
            .as_ref()
            .ok_or_else(|| Error::rejected("diffusion stage has not run"))
    }

    pub fn report(&self) -> &EvalReport {
        &self.report
    }

    /// Runs stages in order through `last`, then returns the report.
    pub fn run_until(mut self, last: StageName) -> Result<EvalReport> {
        self.exec(StageName::Demos, Self::stage_demos)?;
        if last >= StageName::Diffusion {
            self.exec(StageName::Diffusion, Self::stage_diffusion)?;
        }
        if last >= StageName::Purify {
            self.exec(StageName::Purify, Self::stage_purify)?;
        }
        if last >= StageName::Learner {
            self.exec(StageName::Learner, Self::stage_learner)?;
        }
        if last >= StageName::Eval {
            self.exec(StageName::Eval, Self::stage_eval)?;
        }
        emit_report(&self.report, &self.out_dir)?;
        Ok(self.report)
    }

    /// Runs stages through `last` and returns the pipeline for further
    /// inspection (used by the focused CLI subcommands).
    pub fn advance_until(mut self, last: StageName) -> Result<Self> {
        self.exec(StageName::Demos, Self::stage_demos)?;
        if last >= StageName::Diffusion {
            self.exec(StageName::Diffusion, Self::stage_diffusion)?;
        }
        if last >= StageName::Purify {
            self.exec(StageName::Purify, Self::stage_purify)?;
        }
        if last >= StageName::Learner {
            self.exec(StageName::Learner, Self::stage_learner)?;
        }
        if last >= StageName::Eval {
            self.exec(StageName::Eval, Self::stage_eval)?;
        }
        Ok(self)
    }

    fn exec(
        &mut self,
        stage: StageName,
        f: fn(&mut Self) -> Result<Value>,
    ) -> Result<()> {
        let name = match stage {
            StageName::Demos => "demos",
            StageName::Diffusion => "diffusion",
            StageName::Purify => "purify",
            StageName::Learner => "learner",
            StageName::Eval => "eval",
        };
        let start = Instant::now();
        match f(self) {
            Ok(value) => {
                self.report.stages.insert(name.into(), value);
                self.report
                    .timings_ms
                    .insert(name.into(), start.elapsed().as_millis() as u64);
                // Keep a partial report on disk after every stage.
                let _ = emit_report(&self.report, &self.out_dir);
                Ok(())
            }
            Err(source) => {
                let _ = emit_report(&self.report, &self.out_dir);
                Err(Error::Stage {
                    stage: name.into(),
                    seed: self.cfg.seed,
                    source: Box::new(source),
                })
            }
        }
    }

    fn demo_path(&self, label: &str) -> PathBuf {
        self.out_dir.join("demos").join(format!("{label}.jsonl"))
    }

    fn load_or_generate(
        &mut self,
        label: &str,
        generate: impl FnOnce(&Self) -> Result<DemoSet>,
    ) -> Result<()> {
        let path = self.demo_path(label);
        let set = if path.exists() {
            load_demos(&path)?
        } else {
            let set = generate(self)?;
            save_demos(&set, &path)?;
            set
        };
        self.demo_sets.insert(label.to_string(), set);
        Ok(())
    }

    fn stage_demos(&mut self) -> Result<Value> {
        let root = self.cfg.seed;
        let n_optimal = self.cfg.demos.n_optimal;
        let n_eval = self.cfg.eval.n_mmd_samples.max(2);
        let n_imperfect = self.cfg.demos.n_imperfect;

        self.load_or_generate("optimal", |p| {
            collect_demos(
                &p.built.optimal,
                &*p.built.env,
                n_optimal,
                derive_seed(root, "demos-optimal"),
                "optimal",
            )
        })?;
        self.load_or_generate("optimal_eval", |p| {
            collect_demos(
                &p.built.optimal,
                &*p.built.env,
                n_eval,
                derive_seed(root, "demos-optimal-eval"),
                "optimal_eval",
            )
        })?;
        for &delta in &self.cfg.demos.deltas.clone() {
            let label = delta_label(delta);
            self.load_or_generate(&label, |p| {
                let noisy =
                    NoisyPolicyWrapper::for_env(&p.built.optimal, delta, &*p.built.env)?;
                let mut set = collect_demos(
                    &noisy,
                    &*p.built.env,
                    n_imperfect,
                    derive_seed(root, &format!("demos-{label}")),
                    &label,
                )?;
                set.generator_meta = crate::demos::GeneratorMeta::ActionNoise { delta };
                Ok(set)
            })?;
        }
        if self.cfg.demos.include_mixed && self.cfg.demos.deltas.len() > 1 {
            let parts: Vec<DemoSet> = self
                .cfg
                .demos
                .deltas
                .iter()
                .map(|&d| self.demo_sets[&delta_label(d)].clone())
                .collect();
            let path = self.demo_path("mixed");
            let set = if path.exists() {
                load_demos(&path)?
            } else {
                let set = mix_demosets(&parts)?;
                save_demos(&set, &path)?;
                set
            };
            self.demo_sets.insert("mixed".into(), set);
        }
        if !self.cfg.demos.checkpoint_fractions.is_empty() {
            let fractions = self.cfg.demos.checkpoint_fractions.clone();
            let missing: Vec<f64> = fractions
                .iter()
                .copied()
                .filter(|&f| !self.demo_path(&super::config::checkpoint_label(f)).exists())
                .collect();
            let history = if missing.is_empty() {
                Vec::new()
            } else {
                let (_, snapshots) = train_reinforce(
                    &*self.built.env,
                    &ReinforceConfig::default(),
                    &fractions,
                    derive_seed(root, "rl-train"),
                )?;
                snapshots
            };
            for &f in &fractions {
                let label = super::config::checkpoint_label(f);
                let path = self.demo_path(&label);
                let set = if path.exists() {
                    load_demos(&path)?
                } else {
                    let set = collect_checkpoint_demos(
                        &history,
                        f,
                        &*self.built.env,
                        n_imperfect,
                        derive_seed(root, &format!("demos-{label}")),
                    )?;
                    save_demos(&set, &path)?;
                    set
                };
                self.demo_sets.insert(label, set);
            }
        }

        let mut summary = BTreeMap::new();
        for (label, set) in &self.demo_sets {
            summary.insert(
                label.clone(),
                json!({
                    "n_transitions": set.len(),
                    "n_episodes": set.episodes().len(),
                    "mean_episode_return": set.mean_episode_return(),
                    "hash": format!("{:016x}", set.content_hash()),
                }),
            );
        }
        for (label, set) in &self.demo_sets {
            self.report.provenance.insert(
                format!("demos:{label}"),
                format!("{:016x}", set.content_hash()),
            );
        }
        Ok(json!(summary))
    }

    fn needs_diffusion(&self) -> bool {
        self.cfg.purify.enabled || self.cfg.purify.sweep_grid.is_some()
    }

    fn stage_diffusion(&mut self) -> Result<Value> {
        if !self.needs_diffusion() {
            return Ok(json!({"skipped": true}));
        }
        let path = self.out_dir.join("denoiser.json");
        let denoiser = if path.exists() {
            load_checkpoint::<Denoiser>(&path, "denoiser")?.payload
        } else {
            let schedule = NoiseSchedule::linear(
                self.cfg.diffusion.t_max,
                self.cfg.diffusion.beta_1,
                self.cfg.diffusion.beta_t,
            )?;
            let seed = derive_seed(self.cfg.seed, "train-diffusion");
            let denoiser = train_denoiser(
                self.demo_set("optimal")?,
                &schedule,
                &self.cfg.diffusion.train,
                seed,
            )?;
            save_checkpoint(
                &path,
                "denoiser",
                vec![
                    format!("root:{}", self.cfg.seed),
                    "stage:train-diffusion".into(),
                ],
                &denoiser,
            )?;
            denoiser
        };
        let summary = json!({
            "final_train_loss": denoiser.final_train_loss,
            "t_max": denoiser.schedule.t_max(),
            "schedule_hash": format!("{:016x}", denoiser.schedule.content_hash()),
            "data_dim": denoiser.data_dim,
        });
        self.denoiser = Some(denoiser);
        Ok(summary)
    }

    fn stage_purify(&mut self) -> Result<Value> {
        if !self.cfg.purify.enabled {
            return Ok(json!({"skipped": true}));
        }
        let purify_cfg = PurifyConfig {
            t_star: self.cfg.purify.t_star,
            noise_at_final_step: self.cfg.purify.noise_at_final_step,
            deterministic_noise: None,
        };
        let mut summary = BTreeMap::new();
        for label in self.cfg.dataset_labels() {
            let out_path = self.out_dir.join("purified").join(format!("{label}.jsonl"));
            let manifest_path = self
                .out_dir
                .join("purified")
                .join(format!("{label}.manifest.json"));
            let seed = derive_seed(self.cfg.seed, &format!("purify-{label}"));
            let (set, manifest) = if out_path.exists() && manifest_path.exists() {
                let set = load_demos(&out_path)?;
                let manifest: PurifyManifest =
                    serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?;
                (set, manifest)
            } else {
                let raw = self.demo_set(&label)?;
                let denoiser = self.denoiser()?;
                let set = purify_dataset(raw, &purify_cfg, denoiser, seed, self.cfg.workers)?;
                let manifest = PurifyManifest::new(seed, &purify_cfg, denoiser, raw, &set);
                save_demos(&set, &out_path)?;
                super::report::write_atomic(
                    &manifest_path,
                    serde_json::to_string_pretty(&manifest)?.as_bytes(),
                )?;
                (set, manifest)
            };
            summary.insert(label.clone(), serde_json::to_value(&manifest)?);
            self.purified.insert(label, set);
        }
        Ok(json!(summary))
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.built.env.action_low().to_vec(),
            self.built.env.action_high().to_vec(),
        )
    }

    fn stage_learner(&mut self) -> Result<Value> {
        let mut summary = BTreeMap::new();
        for label in self.cfg.learner.datasets.clone() {
            let raw = self.demo_set(&label)?.clone();
            let optimal = self.demo_set("optimal")?.clone();
            let dp_data = if self.cfg.purify.enabled {
                let purified = self.purified.get(&label).ok_or_else(|| {
                    Error::rejected(format!("purified set {label:?} missing"))
                })?;
                mix_demosets(&[purified.clone(), optimal.clone()])?
            } else {
                mix_demosets(&[raw.clone(), optimal.clone()])?
            };
            let all_data = mix_demosets(&[raw, optimal])?;

            match self.cfg.learner.kind.as_str() {
                "bc" => {
                    let mut bc_cfg = self.cfg.learner.bc.clone();
                    bc_cfg.action_bounds = Some(self.bounds());
                    let seed = derive_seed(self.cfg.seed, &format!("train-bc-{label}"));
                    for (name, data) in [
                        (format!("dp_bc:{label}"), &dp_data),
                        (format!("bc_all:{label}"), &all_data),
                    ] {
                        let path = self.policy_path(&name);
                        let payload = if path.exists() {
                            load_checkpoint::<BcPayload>(&path, "policy")?.payload
                        } else {
                            let result = bc_train(data, &bc_cfg, seed)?;
                            let payload = BcPayload {
                                policy: result.policy,
                                final_nll: result.final_nll,
                            };
                            save_checkpoint(
                                &path,
                                "policy",
                                vec![
                                    format!("root:{}", self.cfg.seed),
                                    format!("stage:train-bc-{label}"),
                                ],
                                &payload,
                            )?;
                            payload
                        };
                        summary.insert(name.clone(), json!({"final_nll": payload.final_nll}));
                        self.policies.insert(name, payload.policy);
                    }
                }
                "gail" => {
                    let mut gail_cfg = self.cfg.learner.gail.clone();
                    if gail_cfg.norm_stats.is_none() {
                        if let Some(d) = &self.denoiser {
                            gail_cfg.norm_stats = Some(d.norm_stats.clone());
                        }
                    }
                    let seed = derive_seed(self.cfg.seed, &format!("train-gail-{label}"));
                    for (name, data) in [
                        (format!("dp_gail:{label}"), &dp_data),
                        (format!("gail_all:{label}"), &all_data),
                    ] {
                        let path = self.policy_path(&name);
                        let payload = if path.exists() {
                            load_checkpoint::<GailPayload>(&path, "policy")?.payload
                        } else {
                            let result = gail_train(data, &*self.built.env, &gail_cfg, seed)?;
                            let payload = GailPayload {
                                policy: result.policy,
                                curve: result.curve,
                            };
                            save_checkpoint(
                                &path,
                                "policy",
                                vec![
                                    format!("root:{}", self.cfg.seed),
                                    format!("stage:train-gail-{label}"),
                                ],
                                &payload,
                            )?;
                            payload
                        };
                        let last = payload.curve.last();
                        summary.insert(
                            name.clone(),
                            json!({
                                "iterations": payload.curve.len(),
                                "final_env_return": last.map(|s| s.env_return_mean),
                                "final_disc_loss": last.map(|s| s.disc_loss),
                            }),
                        );
                        self.gail_curves.insert(name.clone(), payload.curve);
                        self.policies.insert(name, payload.policy);
                    }
                }
                other => {
                    return Err(Error::rejected(format!("unknown learner kind {other:?}")));
                }
            }
        }
        let mut value = serde_json::Map::new();
        for (k, v) in summary {
            value.insert(k, v);
        }
        let mut out = serde_json::Map::new();
        out.insert("policies".into(), Value::Object(value));
        if !self.gail_curves.is_empty() {
            out.insert("gail_curves".into(), serde_json::to_value(&self.gail_curves)?);
        }
        Ok(Value::Object(out))
    }

    fn policy_path(&self, name: &str) -> PathBuf {
        self.out_dir
            .join("policies")
            .join(format!("{}.json", name.replace(':', "_")))
    }

    /// MMD of every imperfect dataset (and its purified version) against the
    /// optimal reference set. The bandwidth is resolved once per dataset from
    /// the pooled (reference, imperfect) samples so the purified comparison
    /// uses the same kernel.
    pub fn compute_mmd_rows(&self) -> Result<Vec<MmdRow>> {
        let n = self.cfg.eval.n_mmd_samples;
        let reference = truncate_rows(self.demo_set("optimal_eval")?.rows(), n);
        let mut rows = Vec::new();
        for label in self.cfg.dataset_labels() {
            let raw = truncate_rows(self.demo_set(&label)?.rows(), n);
            let sigma =
                crate::eval::resolve_bandwidth(&reference, &raw, Bandwidth::MedianHeuristic)?;
            let cfg = MmdConfig {
                bandwidth: Bandwidth::Fixed(sigma),
            };
            let mmd_imperfect = mmd(&reference, &raw, &cfg)?;
            let mmd_purified = match self.purified.get(&label) {
                Some(p) => Some(mmd(&reference, &truncate_rows(p.rows(), n), &cfg)?),
                None => None,
            };
            rows.push(MmdRow {
                dataset: label,
                mmd_imperfect,
                mmd_purified,
            });
        }
        Ok(rows)
    }

    /// DP-BC returns at each sweep grid point (requires a trained denoiser).
    pub fn compute_sweep(&self) -> Result<Option<SweepResult>> {
        let Some(sweep_cfg) = self.cfg.sweep_config(self.bounds()) else {
            return Ok(None);
        };
        let label = self
            .cfg
            .learner
            .datasets
            .first()
            .cloned()
            .unwrap_or_else(|| delta_label(*self.cfg.demos.deltas.first().unwrap_or(&0.6)));
        let result = t_star_sweep(
            self.demo_set("optimal")?,
            self.demo_set(&label)?,
            self.denoiser()?,
            &*self.built.env,
            &sweep_cfg,
            derive_seed(self.cfg.seed, "sweep"),
        )?;
        Ok(Some(result))
    }

    /// Mean/median/Gaussian filter baselines: filter the imperfect demos,
    /// train BC on filtered + optimal, evaluate.
    pub fn compute_filter_baselines(&self) -> Result<Vec<FilterBaselineRow>> {
        let label = self
            .cfg
            .learner
            .datasets
            .first()
            .cloned()
            .unwrap_or_else(|| delta_label(*self.cfg.demos.deltas.first().unwrap_or(&0.6)));
        let raw = self.demo_set(&label)?;
        let optimal = self.demo_set("optimal")?;
        let mut bc_cfg = self.cfg.learner.bc.clone();
        bc_cfg.action_bounds = Some(self.bounds());
        let kinds = [
            (
                "mean",
                FilterKind::Mean {
                    window: self.cfg.eval.filter_window,
                },
            ),
            (
                "median",
                FilterKind::Median {
                    window: self.cfg.eval.filter_window,
                },
            ),
            (
                "gaussian",
                FilterKind::Gaussian {
                    sigma: self.cfg.eval.filter_sigma,
                },
            ),
        ];
        let mut rows = Vec::new();
        for (name, kind) in kinds {
            let filtered = filter_denoise(raw, kind, FilterTarget::ActionsOnly)?;
            let data = mix_demosets(&[filtered, optimal.clone()])?;
            let bc = bc_train(
                &data,
                &bc_cfg,
                derive_seed(self.cfg.seed, &format!("train-filter-{name}")),
            )?;
            let est = evaluate_policy(
                &bc.policy,
                &*self.built.env,
                self.cfg.eval.n_eval_episodes,
                self.cfg.eval.gamma,
                derive_seed(self.cfg.seed, &format!("eval-filter-{name}")),
            )?;
            rows.push(FilterBaselineRow {
                filter: name.into(),
                mean_return: est.mean_undiscounted,
                stderr: est.stderr,
            });
        }
        Ok(rows)
    }

    fn stage_eval(&mut self) -> Result<Value> {
        let mut out = serde_json::Map::new();
        let n_eval = self.cfg.eval.n_eval_episodes;
        let gamma = self.cfg.eval.gamma;

        // Policy values: every trained policy plus analytic and random
        // baselines.
        let mut value_rows: Vec<PolicyValueRow> = Vec::new();
        let eval_one = |name: &str, policy: &dyn crate::envs::ActionSource| -> Result<PolicyValueRow> {
            let seed = derive_seed(self.cfg.seed, &format!("eval-{name}"));
            let (disc, undisc) =
                crate::envs::rollout::episode_returns(&policy, &*self.built.env, n_eval, gamma, seed);
            let est = crate::envs::PolicyValueEstimate::from_returns(&disc, &undisc, gamma);
            Ok(PolicyValueRow {
                policy: name.to_string(),
                mean_return: est.mean_undiscounted,
                stderr: est.stderr,
                mean_discounted: est.mean_discounted,
                n_episodes: est.n_episodes,
                returns: undisc,
            })
        };
        value_rows.push(eval_one("optimal", &self.built.optimal)?);
        let random = GaussianPolicy::new(
            self.built.env.state_dim(),
            self.built.env.action_dim(),
            &[100, 100],
            Some(self.bounds()),
            derive_seed(self.cfg.seed, "random-policy"),
        )?;
        value_rows.push(eval_one("random", &random)?);
        for (name, policy) in &self.policies {
            value_rows.push(eval_one(name, policy)?);
        }
        out.insert("policy_values".into(), serde_json::to_value(&value_rows)?);

        if self.cfg.eval.mmd {
            let rows = self.compute_mmd_rows()?;
            out.insert("mmd".into(), serde_json::to_value(&rows)?);
        }

        let mut ttest_rows: Vec<TtestRow> = Vec::new();
        let mut skipped = Vec::new();
        for (a, b) in &self.cfg.eval.ttest_pairs {
            let find = |name: &str| value_rows.iter().find(|r| r.policy == name);
            match (find(a), find(b)) {
                (Some(ra), Some(rb)) => {
                    ttest_rows.push(TtestRow {
                        a: a.clone(),
                        b: b.clone(),
                        p_value: welch_t_test(&ra.returns, &rb.returns)?,
                    });
                }
                _ => skipped.push(format!("{a} vs {b}")),
            }
        }
        if !ttest_rows.is_empty() {
            out.insert("ttest".into(), serde_json::to_value(&ttest_rows)?);
        }
        if !skipped.is_empty() {
            out.insert("ttest_skipped".into(), serde_json::to_value(&skipped)?);
        }

        if self.cfg.eval.decay_curve {
            let noisy_label = delta_label(*self.cfg.demos.deltas.first().ok_or_else(|| {
                Error::rejected("decay curve needs at least one delta dataset")
            })?);
            let schedule = NoiseSchedule::linear(
                self.cfg.diffusion.t_max,
                self.cfg.diffusion.beta_1,
                self.cfg.diffusion.beta_t,
            )?;
            let curve = divergence_decay_curve(
                self.demo_set("optimal_eval")?,
                self.demo_set(&noisy_label)?,
                &schedule,
                &self.cfg.eval.decay_t_grid,
                self.cfg.eval.decay_samples,
                self.cfg.eval.decay_permutations,
                derive_seed(self.cfg.seed, "decay-curve"),
            )?;
            out.insert("decay_curve".into(), serde_json::to_value(&curve)?);
        }

        if let Some(sweep) = self.compute_sweep()? {
            out.insert("sweep".into(), serde_json::to_value(&sweep.rows)?);
            out.insert("sweep_argmax_t_star".into(), json!(sweep.argmax_t_star));
        }

        if self.cfg.eval.filter_baselines {
            let rows = self.compute_filter_baselines()?;
            out.insert("filter_baselines".into(), serde_json::to_value(&rows)?);
        }

        Ok(Value::Object(out))
    }
}

fn truncate_rows(mut rows: Vec<Vec<f64>>, n: usize) -> Vec<Vec<f64>> {
    rows.truncate(n.max(2));
    rows
}

/// Executes the full pipeline described by `cfg` and returns the report
/// (also written to `cfg.out_dir` as `report.json` plus CSVs).
pub fn run_pipeline(cfg: &RunConfig) -> Result<EvalReport> {
    Pipeline::new(cfg.clone())?.run_until(StageName::Eval)
}
