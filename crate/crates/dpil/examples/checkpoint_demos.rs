//! Imperfect demonstrations from early RL checkpoints: train a policy with
//! REINFORCE, snapshot it mid-training, and purify the snapshot's demos.
//!
//! ```bash
//! cargo run --example checkpoint_demos
//! ```

use dpil::demos::{collect_checkpoint_demos, collect_demos, mix_demosets};
use dpil::diffusion::{purify_dataset, train_denoiser, DenoiserTrainConfig, NoiseSchedule, PurifyConfig};
use dpil::envs::{evaluate_policy, Environment, PointReach};
use dpil::imitation::{bc_train, train_reinforce, BcConfig, ReinforceConfig};

fn main() -> dpil::Result<()> {
    let env = PointReach::new([0.5, 0.5], 0.1, 5.0, 25)?;

    let rl_cfg = ReinforceConfig {
        n_iters: 200,
        rollout_transitions: 500,
        learning_rate: 1e-3,
        entropy_coef: 1e-4,
        ..ReinforceConfig::default()
    };
    println!("training an RL policy, snapshotting at 30% and 100% ...");
    let (_, snapshots) = train_reinforce(&env, &rl_cfg, &[0.3, 1.0], 3)?;
    for snap in &snapshots {
        let est = evaluate_policy(&snap.policy, &env, 50, 0.995, 17)?;
        println!(
            "  checkpoint {:.0}%: return {:7.2} +- {:.2}",
            snap.fraction * 100.0,
            est.mean_undiscounted,
            est.stderr
        );
    }

    // The early checkpoint plays the D4/D5 role: plausible but non-optimal.
    let early = collect_checkpoint_demos(&snapshots, 0.3, &env, 500, 23)?;
    println!("collected {} transitions from the 30% checkpoint", early.len());

    let optimal = collect_demos(&env.optimal_policy(), &env, 250, 7, "optimal")?;
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
    let denoiser = train_denoiser(&optimal, &schedule, &dcfg, 13)?;
    let purified = purify_dataset(&early, &PurifyConfig::new(0.05)?, &denoiser, 29, 1)?;

    let bc_cfg = BcConfig {
        epochs: 200,
        batch_size: 128,
        learning_rate: 1e-3,
        hidden: vec![100, 100],
        action_bounds: Some((env.action_low().to_vec(), env.action_high().to_vec())),
    };
    for (name, set) in [("BC-all", &early), ("DP-BC", &purified)] {
        let data = mix_demosets(&[set.clone(), optimal.clone()])?;
        let bc = bc_train(&data, &bc_cfg, 33)?;
        let est = evaluate_policy(&bc.policy, &env, 100, 0.995, 0xE7A1)?;
        println!("{name:8} return {:7.2} +- {:.2}", est.mean_undiscounted, est.stderr);
    }
    Ok(())
}
