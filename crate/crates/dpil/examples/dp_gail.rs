//! Online adversarial imitation from purified demonstrations (DP-GAIL).
//!
//! ```bash
//! cargo run --example dp_gail
//! ```

use dpil::demos::{collect_demos, mix_demosets, NoisyPolicyWrapper};
use dpil::diffusion::{purify_dataset, train_denoiser, DenoiserTrainConfig, NoiseSchedule, PurifyConfig};
use dpil::envs::{evaluate_policy, Environment, PointReach};
use dpil::imitation::{gail_train, GailConfig, GaussianPolicy};

fn main() -> dpil::Result<()> {
    let env = PointReach::new([0.5, 0.5], 0.1, 5.0, 25)?;
    let optimal = collect_demos(&env.optimal_policy(), &env, 250, 7, "optimal")?;
    let noisy_policy = NoisyPolicyWrapper::for_env(env.optimal_policy(), 0.6, &env)?;
    let imperfect = collect_demos(&noisy_policy, &env, 500, 9, "d0.6")?;

    let schedule = NoiseSchedule::linear(1000, 1e-4, 0.02)?;
    let dcfg = DenoiserTrainConfig {
        epochs: 1000,
        batch_size: 64,
        learning_rate: 1e-3,
        n_layers: 4,
        hidden_width: 64,
        time_embed_dim: 16,
        dropout: 0.1,
        ..DenoiserTrainConfig::default()
    };
    println!("training denoiser and purifying ...");
    let denoiser = train_denoiser(&optimal, &schedule, &dcfg, 13)?;
    let purified = purify_dataset(&imperfect, &PurifyConfig::new(0.1)?, &denoiser, 21, 1)?;
    let expert = mix_demosets(&[purified, optimal])?;

    // Desk-scale recipe: one REINFORCE update per iteration against five
    // discriminator updates, entropy bonus keeping exploration alive.
    let cfg = GailConfig {
        n_iters: 300,
        rollout_transitions: 500,
        policy_learning_rate: 1e-3,
        entropy_coef: 3e-3,
        disc_learning_rate: 1e-4,
        disc_updates_per_iter: 5,
        policy_updates_per_iter: 1,
        norm_stats: Some(denoiser.norm_stats.clone()),
        ..GailConfig::default()
    };
    let random = GaussianPolicy::new(
        2,
        2,
        &[100, 100],
        Some((env.action_low().to_vec(), env.action_high().to_vec())),
        999,
    )?;
    let base = evaluate_policy(&random, &env, 50, 0.995, 55)?;
    println!("random baseline: {:.2} +- {:.2}", base.mean_undiscounted, base.stderr);

    println!("training DP-GAIL for {} iterations ...", cfg.n_iters);
    let result = gail_train(&expert, &env, &cfg, 31)?;
    for stats in result.curve.iter().step_by(50) {
        println!(
            "iter {:3}: rollout return {:7.2}, discriminator objective {:.3}",
            stats.iteration, stats.env_return_mean, stats.disc_loss
        );
    }
    let final_est = evaluate_policy(&result.policy, &env, 50, 0.995, 56)?;
    println!(
        "final DP-GAIL return {:.2} +- {:.2}",
        final_est.mean_undiscounted, final_est.stderr
    );
    Ok(())
}
