//! Offline imitation from imperfect demonstrations: behavioral cloning on
//! purified data (DP-BC) against cloning the raw data (BC-all).
//!
//! ```bash
//! cargo run --example dp_bc
//! ```

use dpil::demos::{collect_demos, mix_demosets, NoisyPolicyWrapper};
use dpil::diffusion::{purify_dataset, train_denoiser, DenoiserTrainConfig, NoiseSchedule, PurifyConfig};
use dpil::envs::{evaluate_policy, Environment, PointReach};
use dpil::imitation::{bc_train, BcConfig};

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
    println!("training denoiser ...");
    let denoiser = train_denoiser(&optimal, &schedule, &dcfg, 13)?;
    let purified = purify_dataset(&imperfect, &PurifyConfig::new(0.1)?, &denoiser, 21, 1)?;

    let bc_cfg = BcConfig {
        epochs: 200,
        batch_size: 128,
        learning_rate: 1e-3,
        hidden: vec![100, 100],
        action_bounds: Some((env.action_low().to_vec(), env.action_high().to_vec())),
    };
    // Optimal demos join both training sets, so the comparison isolates the
    // purification.
    let dp_data = mix_demosets(&[purified, optimal.clone()])?;
    let all_data = mix_demosets(&[imperfect, optimal.clone()])?;
    println!("training DP-BC and BC-all ({} epochs each) ...", bc_cfg.epochs);
    let dp = bc_train(&dp_data, &bc_cfg, 33)?;
    let all = bc_train(&all_data, &bc_cfg, 33)?;

    let eval = |name: &str, policy: &dyn dpil::envs::ActionSource| -> dpil::Result<()> {
        let est = evaluate_policy(policy, &env, 100, 0.995, 0xE7A1)?;
        println!(
            "{name:8} return {:7.2} +- {:.2} over {} episodes",
            est.mean_undiscounted, est.stderr, est.n_episodes
        );
        Ok(())
    };
    eval("optimal", &env.optimal_policy())?;
    eval("DP-BC", &dp.policy)?;
    eval("BC-all", &all.policy)?;
    Ok(())
}
