//! Acceptance suite: one test per claim, each printing a PASS line with the
//! measured evidence. Everything is seeded; reruns produce identical numbers.
//!
//! The shared fixture holds five desk-scale experiment replicas (optimal and
//! noisy demo sets plus a trained denoiser per replica) on the PointReach
//! task; heavier criteria reuse it instead of retraining.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use dpil::demos::{
    collect_demos, filter_denoise, mix_demosets, DemoSet, FilterKind, FilterTarget,
    GeneratorMeta, NoisyPolicyWrapper, Transition,
};
use dpil::diffusion::{
    forward_diffuse, purify_dataset, train_denoiser, Denoiser, DenoiserTrainConfig,
    NoiseSchedule, PurifyConfig,
};
use dpil::envs::{evaluate_policy, Environment, PointReach};
use dpil::eval::{
    c_varpi, divergence_decay_curve, mmd, resolve_bandwidth, t_star_sweep, tv_bound,
    welch_t_test, Bandwidth, BoundInputs, MmdConfig, SweepConfig,
};
use dpil::harness::{run_pipeline, RunConfig};
use dpil::imitation::{bc_train, gail_train, BcConfig, GailConfig, GaussianPolicy};
use dpil::nn::{Activation, LayerSpec, Mlp, Mode};
use dpil::seed::{derive_indexed, rng_from_seed};

const EVAL_SEED: u64 = 0xE7A1;
const EVAL_EPISODES: usize = 100;
const GAMMA: f64 = 0.995;

fn desk_env() -> PointReach {
    PointReach::new([0.5, 0.5], 0.1, 5.0, 25).unwrap()
}

fn desk_denoiser_cfg() -> DenoiserTrainConfig {
    DenoiserTrainConfig {
        epochs: 1500,
        batch_size: 64,
        learning_rate: 1e-3,
        n_layers: 4,
        hidden_width: 64,
        time_embed_dim: 16,
        dropout: 0.1,
        batch_norm: true,
        lr_decay_ratio: 1.0,
        activation: Activation::Relu,
    }
}

fn desk_bc_cfg(env: &PointReach) -> BcConfig {
    BcConfig {
        epochs: 200,
        batch_size: 128,
        learning_rate: 1e-3,
        hidden: vec![100, 100],
        action_bounds: Some((env.action_low().to_vec(), env.action_high().to_vec())),
    }
}

struct Replica {
    optimal: DemoSet,
    optimal_eval: DemoSet,
    /// Keyed by delta in hundredths: 60, 40, 25; plus the mixed set.
    noisy: BTreeMap<u64, DemoSet>,
    mixed: DemoSet,
    denoiser: Denoiser,
}

struct Fixture {
    env: PointReach,
    replicas: Vec<Replica>,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let start = Instant::now();
        let env = desk_env();
        let ctrl = env.optimal_policy();
        let schedule = NoiseSchedule::linear(1000, 1e-4, 0.02).unwrap();
        let replicas = (0..5u64)
            .map(|s| {
                let optimal =
                    collect_demos(&ctrl, &env, 250, derive_indexed(s, "opt", 0), "optimal")
                        .unwrap();
                let optimal_eval = collect_demos(
                    &ctrl,
                    &env,
                    500,
                    derive_indexed(s, "opt-eval", 0),
                    "optimal_eval",
                )
                .unwrap();
                let mut noisy = BTreeMap::new();
                for delta in [0.6, 0.4, 0.25] {
                    let key = (delta * 100.0) as u64;
                    let wrapped =
                        NoisyPolicyWrapper::for_env(env.optimal_policy(), delta, &env).unwrap();
                    let set = collect_demos(
                        &wrapped,
                        &env,
                        500,
                        derive_indexed(s, "noisy", key),
                        &format!("d{delta}"),
                    )
                    .unwrap();
                    noisy.insert(key, set);
                }
                let mixed =
                    mix_demosets(&[noisy[&60].clone(), noisy[&40].clone(), noisy[&25].clone()])
                        .unwrap();
                let denoiser = train_denoiser(
                    &optimal,
                    &schedule,
                    &desk_denoiser_cfg(),
                    derive_indexed(s, "den", 0),
                )
                .unwrap();
                Replica {
                    optimal,
                    optimal_eval,
                    noisy,
                    mixed,
                    denoiser,
                }
            })
            .collect();
        eprintln!("fixture built in {:.1}s", start.elapsed().as_secs_f64());
        Fixture { env, replicas }
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn stderr(v: &[f64]) -> f64 {
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0);
    (var / v.len() as f64).sqrt()
}

/// Criterion 1: analytic MLP gradients match central finite differences
/// (relative error <= 1e-4) over 100 random small nets.
#[test]
fn criterion_1_gradient_oracle() {
    let start = Instant::now();
    let mut checked_params = 0usize;
    for seed in 0..100u64 {
        let mut rng = rng_from_seed(seed);
        let n_layers = rng.gen_range(1..=3);
        let in_dim = rng.gen_range(1..=8);
        let mut specs = Vec::new();
        for k in 0..n_layers {
            let activation = match rng.gen_range(0..3) {
                0 => Activation::Relu,
                1 => Activation::Tanh,
                _ => Activation::Identity,
            };
            specs.push(LayerSpec {
                out_dim: rng.gen_range(1..=8),
                activation,
                batch_norm: k + 1 < n_layers && rng.gen_bool(0.5),
            });
        }
        let dropout = if n_layers > 1 && rng.gen_bool(0.5) {
            rng.gen_range(0.1..0.4)
        } else {
            0.0
        };
        let mut net = Mlp::new(in_dim, &specs, dropout, &mut rng).unwrap();
        let batch = rng.gen_range(2..=4);
        let inputs: Vec<Vec<f64>> = (0..batch)
            .map(|_| (0..in_dim).map(|_| rng.gen_range(-1.5..1.5)).collect())
            .collect();
        let out_dim = net.out_dim();
        let targets: Vec<Vec<f64>> = (0..batch)
            .map(|_| (0..out_dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let loss_fn = |b: usize, out: &[f64]| {
            let t = &targets[b];
            let mut loss = 0.0;
            let mut grad = Vec::with_capacity(out.len());
            for (o, &tv) in out.iter().zip(t) {
                let d = o - tv;
                loss += d * d;
                grad.push(2.0 * d);
            }
            (loss, grad)
        };
        let plan = net.sample_dropout_plan(batch, &mut rng_from_seed(seed ^ 0x5eed));
        let (_, grads, _) = net
            .batch_gradient(&inputs, loss_fn, Mode::Train, Some(&plan))
            .unwrap();
        let params = net.params_flat();
        let h = 1e-5;
        for i in 0..params.len() {
            let mut plus = params.clone();
            plus[i] += h;
            net.set_params_flat(&plus).unwrap();
            let lp = net
                .batch_loss(&inputs, |b, out| loss_fn(b, out).0, Mode::Train, Some(&plan))
                .unwrap();
            let mut minus = params.clone();
            minus[i] -= h;
            net.set_params_flat(&minus).unwrap();
            let lm = net
                .batch_loss(&inputs, |b, out| loss_fn(b, out).0, Mode::Train, Some(&plan))
                .unwrap();
            net.set_params_flat(&params).unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            let analytic = grads.0[i];
            let tol = 1e-9 + 1e-4 * analytic.abs().max(numeric.abs());
            assert!(
                (analytic - numeric).abs() <= tol,
                "seed {seed} param {i}: analytic {analytic} vs numeric {numeric}"
            );
        }
        checked_params += params.len();
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 30.0, "criterion 1 took {secs:.1}s (budget 30s)");
    println!(
        "ACCEPTANCE 1 (gradient oracle): PASS - {checked_params} parameters across 100 random nets matched central finite differences within 1e-4 in {secs:.1}s"
    );
}

/// Criterion 2: a denoiser trained on 1-D Gaussian data matches the analytic
/// posterior-noise oracle within 0.1 on a fixed grid, and forward-diffusion
/// marginals match (sqrt(abar) x0, (1-abar) I) within 3 standard errors over
/// 1e4 draws.
#[test]
fn criterion_2_diffusion_oracle() {
    let start = Instant::now();
    // Two independent N(2, 0.5^2) coordinates per transition; the analytic
    // oracle applies per dimension since the data distribution is a product.
    let (mu, sigma) = (2.0, 0.5);
    let mut rng = rng_from_seed(77);
    let mut demos = DemoSet::new(1, 1, "gauss", GeneratorMeta::None);
    for i in 0..2048u64 {
        let x: f64 = mu + sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        let y: f64 = mu + sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        demos.transitions.push(Transition {
            episode_id: i,
            step_index: 0,
            state: vec![x],
            action: vec![y],
            reward: None,
        });
    }
    let schedule = NoiseSchedule::linear(100, 1e-4, 0.02).unwrap();
    let cfg = DenoiserTrainConfig {
        epochs: 1200,
        batch_size: 128,
        learning_rate: 1e-3,
        n_layers: 3,
        hidden_width: 64,
        time_embed_dim: 16,
        dropout: 0.0,
        batch_norm: false,
        lr_decay_ratio: 0.05,
        activation: Activation::Tanh,
    };
    let denoiser = train_denoiser(&demos, &schedule, &cfg, 13).unwrap();

    // In the denoiser's normalized space the sample mean/std are exactly
    // (0, 1), so the oracle there is sqrt(1-abar) x / (abar + 1 - abar).
    let mut worst: f64 = 0.0;
    for step in (1..=10).map(|k| k * 10) {
        let abar = denoiser.schedule.alpha_bar(step);
        for k in -3..=3 {
            let x = k as f64 * 0.5;
            let oracle = (1.0 - abar).sqrt() * x / (abar + (1.0 - abar));
            for p in denoiser.predict_noise(&[x, x], step) {
                worst = worst.max((p - oracle).abs());
            }
        }
    }
    assert!(worst < 0.1, "worst oracle deviation {worst}");

    // Forward marginal: 1e4 draws at a mid step.
    let step = 50;
    let x0 = vec![0.7];
    let n = 10_000;
    let mut rng = rng_from_seed(123);
    let samples: Vec<f64> = (0..n)
        .map(|_| forward_diffuse(&x0, step, &schedule, &mut rng).unwrap()[0])
        .collect();
    let abar = schedule.alpha_bar(step);
    let m = mean(&samples);
    let var = samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n as f64 - 1.0);
    let true_var = 1.0 - abar;
    let se_mean = true_var.sqrt() / (n as f64).sqrt();
    let se_var = true_var * (2.0 / (n as f64 - 1.0)).sqrt();
    assert!(
        (m - abar.sqrt() * 0.7).abs() < 3.0 * se_mean,
        "marginal mean off: {m}"
    );
    assert!((var - true_var).abs() < 3.0 * se_var, "marginal var off: {var}");

    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "criterion 2 took {secs:.1}s (budget 2min)");
    println!(
        "ACCEPTANCE 2 (diffusion oracle): PASS - trained denoiser within {worst:.3} of the analytic posterior (tol 0.1); forward marginals within 3 SE over 1e4 draws; {secs:.1}s"
    );
}

/// Criterion 3: the MMD between forward-diffused optimal and delta=0.6 demo
/// sets is non-increasing over a 10-point t grid, violations bounded by
/// twice the permutation-null std.
#[test]
fn criterion_3_divergence_decay() {
    let fx = fixture();
    let start = Instant::now();
    let schedule = NoiseSchedule::linear(1000, 1e-4, 0.02).unwrap();
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let curve = divergence_decay_curve(
        &fx.replicas[0].optimal_eval,
        &fx.replicas[0].noisy[&60],
        &schedule,
        &grid,
        256,
        60,
        derive_indexed(0, "decay", 0),
    )
    .unwrap();
    let mut max_violation: f64 = 0.0;
    for w in curve.windows(2) {
        let slack = 2.0 * w[0].null_std.max(w[1].null_std);
        let violation = w[1].mmd - w[0].mmd;
        if violation > 0.0 {
            max_violation = max_violation.max(violation);
            assert!(
                violation <= slack,
                "increase of {violation} at t={} exceeds 2x null std {slack}",
                w[1].t
            );
        }
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "criterion 3 took {secs:.1}s (budget 2min)");
    println!(
        "ACCEPTANCE 3 (divergence decay): PASS - curve {:.4} -> {:.4} over t in [0.1, 1.0], max increase {max_violation:.4} within 2x permutation null; {secs:.1}s",
        curve[0].mmd,
        curve.last().unwrap().mmd
    );
}

/// Criterion 4: MMD(optimal, purified) < MMD(optimal, imperfect) for all
/// three noise levels, >= 4 of 5 seeds each, 500-sample sets. Purification
/// times follow the per-dataset tuning the source experiments report
/// (larger noise, larger t*).
#[test]
fn criterion_4_mmd_direction() {
    let fx = fixture();
    let start = Instant::now();
    let mut summary = Vec::new();
    for (key, t_star) in [(60u64, 0.1), (40, 0.05), (25, 0.03)] {
        let mut wins = 0;
        for (s, replica) in fx.replicas.iter().enumerate() {
            let raw = &replica.noisy[&key];
            let purified = purify_dataset(
                raw,
                &PurifyConfig::new(t_star).unwrap(),
                &replica.denoiser,
                derive_indexed(s as u64, "pur", key),
                2,
            )
            .unwrap();
            let reference = replica.optimal_eval.rows();
            let sigma =
                resolve_bandwidth(&reference, &raw.rows(), Bandwidth::MedianHeuristic).unwrap();
            let cfg = MmdConfig {
                bandwidth: Bandwidth::Fixed(sigma),
            };
            let m_raw = mmd(&reference, &raw.rows(), &cfg).unwrap();
            let m_pur = mmd(&reference, &purified.rows(), &cfg).unwrap();
            if m_pur < m_raw {
                wins += 1;
            }
        }
        assert!(
            wins >= 4,
            "delta {} improved on only {wins}/5 seeds",
            key as f64 / 100.0
        );
        summary.push(format!("d{}: {wins}/5", key as f64 / 100.0));
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 600.0, "criterion 4 took {secs:.1}s (budget 10min)");
    println!(
        "ACCEPTANCE 4 (MMD direction): PASS - purified closer to optimal than imperfect ({}); {secs:.1}s",
        summary.join(", ")
    );
}

/// Criterion 5: DP-BC beats BC-all on the delta=0.6 and mixed settings over
/// 5 seeds with one-sided Welch p < 0.1. Purification times are tuned per
/// dataset as in the source experiments: 0.1 for the noisy set, 0.05 for the
/// mixed set (two thirds of which is lower-noise data).
#[test]
fn criterion_5_dp_bc_beats_bc_all() {
    let fx = fixture();
    let start = Instant::now();
    let bc_cfg = desk_bc_cfg(&fx.env);
    let mut summary = Vec::new();
    for (k, name, t_star) in [(0usize, "d0.6", 0.1), (1, "mixed", 0.05)] {
        let pcfg = PurifyConfig::new(t_star).unwrap();
        let mut dp_returns = Vec::new();
        let mut all_returns = Vec::new();
        for (s, replica) in fx.replicas.iter().enumerate() {
            let raw = if k == 0 {
                replica.noisy[&60].clone()
            } else {
                replica.mixed.clone()
            };
            let purified = purify_dataset(
                &raw,
                &pcfg,
                &replica.denoiser,
                derive_indexed(s as u64, "pur", k as u64),
                2,
            )
            .unwrap();
            let dp_data = mix_demosets(&[purified, replica.optimal.clone()]).unwrap();
            let all_data = mix_demosets(&[raw, replica.optimal.clone()]).unwrap();
            let bc_seed = derive_indexed(s as u64, "bc", k as u64);
            let dp = bc_train(&dp_data, &bc_cfg, bc_seed).unwrap();
            let all = bc_train(&all_data, &bc_cfg, bc_seed).unwrap();
            let dp_est =
                evaluate_policy(&dp.policy, &fx.env, EVAL_EPISODES, GAMMA, EVAL_SEED).unwrap();
            let all_est =
                evaluate_policy(&all.policy, &fx.env, EVAL_EPISODES, GAMMA, EVAL_SEED).unwrap();
            dp_returns.push(dp_est.mean_undiscounted);
            all_returns.push(all_est.mean_undiscounted);
        }
        let p = welch_t_test(&dp_returns, &all_returns).unwrap();
        assert!(
            mean(&dp_returns) > mean(&all_returns),
            "{name}: DP-BC mean {} did not exceed BC-all mean {}",
            mean(&dp_returns),
            mean(&all_returns)
        );
        assert!(p < 0.1, "{name}: one-sided Welch p = {p}");
        summary.push(format!(
            "{name}: DP-BC {:.2} vs BC-all {:.2}, p = {p:.4}",
            mean(&dp_returns),
            mean(&all_returns)
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 900.0, "criterion 5 took {secs:.1}s (budget 15min)");
    println!(
        "ACCEPTANCE 5 (DP-BC > BC-all): PASS - {}; {secs:.1}s",
        summary.join("; ")
    );
}

/// Criterion 6: the best purification time for noisier demos is at least the
/// best time for cleaner demos (majority over 3 replicas, shared grid), and
/// for the noisy set the best point beats the t* -> 0 limit.
#[test]
fn criterion_6_t_star_ordering() {
    let fx = fixture();
    let start = Instant::now();
    let sweep_cfg = SweepConfig {
        t_grid: vec![0.005, 0.01, 0.03, 0.05, 0.1, 0.2],
        n_seeds: 1,
        bc: desk_bc_cfg(&fx.env),
        n_eval_episodes: EVAL_EPISODES,
        eval_gamma: GAMMA,
        workers: 2,
    };
    let mut ordering_holds = 0;
    let mut improves_over_raw = 0;
    let mut lines = Vec::new();
    for s in 0..3u64 {
        let replica = &fx.replicas[s as usize];
        let mut argmaxes = Vec::new();
        let mut noisy_gain = 0.0;
        for (key, delta) in [(60u64, 0.6f64), (25, 0.25)] {
            let result = t_star_sweep(
                &replica.optimal,
                &replica.noisy[&key],
                &replica.denoiser,
                &fx.env,
                &sweep_cfg,
                derive_indexed(s, "sweep", key),
            )
            .unwrap();
            if delta > 0.5 {
                let best = result
                    .rows
                    .iter()
                    .map(|r| r.mean_return)
                    .fold(f64::NEG_INFINITY, f64::max);
                noisy_gain = best - result.rows[0].mean_return;
            }
            argmaxes.push(result.argmax_t_star);
        }
        if argmaxes[0] >= argmaxes[1] {
            ordering_holds += 1;
        }
        if noisy_gain > 0.0 {
            improves_over_raw += 1;
        }
        lines.push(format!(
            "seed {s}: argmax(d0.6) = {}, argmax(d0.25) = {}",
            argmaxes[0], argmaxes[1]
        ));
    }
    assert!(
        ordering_holds >= 2,
        "t* ordering held on only {ordering_holds}/3 replicas ({lines:?})"
    );
    assert!(
        improves_over_raw >= 2,
        "noisy-set argmax beat the t*->0 limit on only {improves_over_raw}/3 replicas"
    );
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 1200.0, "criterion 6 took {secs:.1}s (budget 20min)");
    println!(
        "ACCEPTANCE 6 (t* ordering): PASS - ordering {ordering_holds}/3, argmax gain over t->0 {improves_over_raw}/3 ({}); {secs:.1}s",
        lines.join("; ")
    );
}

/// Criterion 7: DP-BC matches or beats the best classical filter baseline on
/// the delta=0.6 analog (ties allowed within one standard error).
#[test]
fn criterion_7_filter_baselines() {
    let fx = fixture();
    let start = Instant::now();
    let bc_cfg = desk_bc_cfg(&fx.env);
    let pcfg = PurifyConfig::new(0.1).unwrap();
    let kinds = [
        ("mean", FilterKind::Mean { window: 5 }),
        ("median", FilterKind::Median { window: 5 }),
        ("gaussian", FilterKind::Gaussian { sigma: 1.0 }),
    ];
    let mut dp_returns = Vec::new();
    let mut filter_returns: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (s, replica) in fx.replicas.iter().enumerate() {
        let raw = &replica.noisy[&60];
        let bc_seed = derive_indexed(s as u64, "bc", 0);
        let purified = purify_dataset(
            raw,
            &pcfg,
            &replica.denoiser,
            derive_indexed(s as u64, "pur", 0),
            2,
        )
        .unwrap();
        let dp_data = mix_demosets(&[purified, replica.optimal.clone()]).unwrap();
        let dp = bc_train(&dp_data, &bc_cfg, bc_seed).unwrap();
        dp_returns.push(
            evaluate_policy(&dp.policy, &fx.env, EVAL_EPISODES, GAMMA, EVAL_SEED)
                .unwrap()
                .mean_undiscounted,
        );
        for (name, kind) in kinds {
            let filtered = filter_denoise(raw, kind, FilterTarget::ActionsOnly).unwrap();
            let data = mix_demosets(&[filtered, replica.optimal.clone()]).unwrap();
            let bc = bc_train(&data, &bc_cfg, bc_seed).unwrap();
            filter_returns.entry(name).or_default().push(
                evaluate_policy(&bc.policy, &fx.env, EVAL_EPISODES, GAMMA, EVAL_SEED)
                    .unwrap()
                    .mean_undiscounted,
            );
        }
    }
    let dp_mean = mean(&dp_returns);
    let (best_name, best_returns) = filter_returns
        .iter()
        .max_by(|a, b| mean(a.1).partial_cmp(&mean(b.1)).unwrap())
        .unwrap();
    let best_mean = mean(best_returns);
    let se_diff = (stderr(&dp_returns).powi(2) + stderr(best_returns).powi(2)).sqrt();
    assert!(
        dp_mean >= best_mean - se_diff,
        "DP-BC {dp_mean:.3} below best filter ({best_name}) {best_mean:.3} by more than 1 se ({se_diff:.3})"
    );
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 900.0, "criterion 7 took {secs:.1}s (budget 15min)");
    let all: Vec<String> = filter_returns
        .iter()
        .map(|(n, r)| format!("{n} {:.2}", mean(r)))
        .collect();
    println!(
        "ACCEPTANCE 7 (filter baselines): PASS - DP-BC {dp_mean:.2} vs best filter {best_name} {best_mean:.2} (all: {}); {secs:.1}s",
        all.join(", ")
    );
}

/// Criterion 8: DP-GAIL clears the random baseline by 5x its standard error,
/// and at self-imitation the discriminator objective stays within 0.1 of
/// -2 ln 2.
#[test]
fn criterion_8_dp_gail() {
    let fx = fixture();
    let start = Instant::now();
    let replica = &fx.replicas[0];
    let purified = purify_dataset(
        &replica.noisy[&60],
        &PurifyConfig::new(0.1).unwrap(),
        &replica.denoiser,
        derive_indexed(0, "pur-gail", 0),
        2,
    )
    .unwrap();
    let expert = mix_demosets(&[purified, replica.optimal.clone()]).unwrap();

    let random = GaussianPolicy::new(
        2,
        2,
        &[100, 100],
        Some((fx.env.action_low().to_vec(), fx.env.action_high().to_vec())),
        999,
    )
    .unwrap();
    let base = evaluate_policy(&random, &fx.env, EVAL_EPISODES, GAMMA, 55).unwrap();
    let bar = base.mean_undiscounted + 5.0 * base.stderr;

    let gail_cfg = GailConfig {
        n_iters: 400,
        rollout_transitions: 500,
        policy_learning_rate: 1e-3,
        entropy_coef: 3e-3,
        disc_learning_rate: 1e-4,
        disc_updates_per_iter: 5,
        policy_updates_per_iter: 1,
        norm_stats: Some(replica.denoiser.norm_stats.clone()),
        ..GailConfig::default()
    };
    let result = gail_train(&expert, &fx.env, &gail_cfg, 31).unwrap();
    let final_est =
        evaluate_policy(&result.policy, &fx.env, EVAL_EPISODES, GAMMA, 56).unwrap();
    assert!(
        final_est.mean_undiscounted > bar,
        "DP-GAIL final {} did not clear random {} + 5 x {}",
        final_est.mean_undiscounted,
        base.mean_undiscounted,
        base.stderr
    );

    // Self-imitation equilibrium: expert demos drawn from the policy GAIL
    // starts with; the saddle objective should hover at -2 ln 2. The policy
    // learning rate is frozen to keep the "demos from the current policy"
    // premise true across iterations (otherwise the agent drifts from its
    // own initial distribution and the premise no longer holds).
    let self_policy = GaussianPolicy::new(
        2,
        2,
        &[100, 100],
        Some((fx.env.action_low().to_vec(), fx.env.action_high().to_vec())),
        dpil::seed::derive_seed(77, "gail-policy-init"),
    )
    .unwrap();
    let self_demos = collect_demos(&self_policy, &fx.env, 500, 400, "self").unwrap();
    let mut self_cfg = gail_cfg.clone();
    self_cfg.n_iters = 40;
    self_cfg.norm_stats = None;
    self_cfg.policy_learning_rate = 1e-8;
    let self_result = gail_train(&self_demos, &fx.env, &self_cfg, 77).unwrap();
    let target = -2.0 * 2f64.ln();
    let max_dev = self_result
        .curve
        .iter()
        .map(|s| (s.disc_loss - target).abs())
        .fold(0.0, f64::max);
    assert!(
        max_dev <= 0.1,
        "self-imitation discriminator objective deviated {max_dev} from -2 ln 2"
    );
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 900.0, "criterion 8 took {secs:.1}s (budget 15min)");
    println!(
        "ACCEPTANCE 8 (DP-GAIL): PASS - final return {:.2} vs bar {bar:.2} (random {:.2} +- {:.2}); self-imitation max deviation {max_dev:.3} <= 0.1; {secs:.1}s",
        final_est.mean_undiscounted, base.mean_undiscounted, base.stderr
    );
}

/// Criterion 9: zeta and the TV/value-gap bounds are monotone in t*, and
/// C_varpi(varpi = 1, d) = sqrt(2d) exactly.
#[test]
fn criterion_9_bound_diagnostics() {
    let start = Instant::now();
    let schedule = NoiseSchedule::linear(1000, 1e-4, 0.02).unwrap();
    let mut last_zeta = f64::NEG_INFINITY;
    let mut last_tv = f64::NEG_INFINITY;
    let mut last_gap = f64::NEG_INFINITY;
    for k in 1..=20 {
        let t_star = k as f64 / 20.0;
        let inputs = BoundInputs {
            t_star,
            ..BoundInputs::default()
        };
        let bound = tv_bound(&inputs, &schedule).unwrap();
        assert!(bound.zeta >= last_zeta, "zeta decreased at t* = {t_star}");
        assert!(bound.tv_rhs >= last_tv, "tv bound decreased at t* = {t_star}");
        assert!(
            bound.value_gap_rhs >= last_gap,
            "value gap decreased at t* = {t_star}"
        );
        last_zeta = bound.zeta;
        last_tv = bound.tv_rhs;
        last_gap = bound.value_gap_rhs;
    }
    for d in 1..=8usize {
        assert_eq!(c_varpi(d, 1.0).unwrap(), (2.0 * d as f64).sqrt());
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 1.0, "criterion 9 took {secs:.2}s (budget 1s)");
    println!(
        "ACCEPTANCE 9 (bound diagnostics): PASS - zeta/tv/value-gap monotone over 20-point grid; C_varpi(1, d) = sqrt(2d) exact; {secs:.3}s"
    );
}

/// Criterion 10: the full pipeline produces byte-identical numeric report
/// content across two runs and across worker counts 1 and 4.
#[test]
fn criterion_10_pipeline_determinism() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.seed = 7;
    cfg.env.horizon = 25;
    cfg.demos.n_optimal = 60;
    cfg.demos.n_imperfect = 80;
    cfg.demos.deltas = vec![0.6];
    cfg.demos.include_mixed = false;
    cfg.diffusion.t_max = 100;
    cfg.diffusion.train.epochs = 150;
    cfg.diffusion.train.hidden_width = 32;
    cfg.diffusion.train.time_embed_dim = 8;
    cfg.learner.bc.epochs = 40;
    cfg.learner.bc.batch_size = 64;
    cfg.eval.n_mmd_samples = 80;
    cfg.eval.n_eval_episodes = 5;
    cfg.eval.ttest_pairs = vec![("dp_bc:d0.6".into(), "bc_all:d0.6".into())];

    let mut reports = Vec::new();
    for (i, workers) in [1usize, 1, 4].iter().enumerate() {
        let mut run_cfg = cfg.clone();
        run_cfg.workers = *workers;
        run_cfg.out_dir = tmp.path().join(format!("run{i}")).display().to_string();
        reports.push(run_pipeline(&run_cfg).unwrap().deterministic_json());
    }
    assert_eq!(reports[0], reports[1], "repeat run differed");
    assert_eq!(reports[0], reports[2], "worker count changed the report");
    let secs = start.elapsed().as_secs_f64();
    println!(
        "ACCEPTANCE 10 (determinism): PASS - identical numeric reports across two runs and worker counts {{1, 4}}; {secs:.1}s"
    );
}
