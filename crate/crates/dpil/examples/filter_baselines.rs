//! Classical temporal filters (mean, median, Gaussian) as alternative
//! purifiers, compared against diffusion purification through BC returns.
//!
//! ```bash
//! cargo run --example filter_baselines
//! ```

use dpil::demos::{collect_demos, filter_denoise, mix_demosets, FilterKind, FilterTarget, NoisyPolicyWrapper};
use dpil::diffusion::{purify_dataset, train_denoiser, DenoiserTrainConfig, NoiseSchedule, PurifyConfig};
use dpil::envs::{evaluate_policy, Environment, PointReach};
use dpil::imitation::{bc_train, BcConfig};

fn main() -> dpil::Result<()> {
    let env = PointReach::new([0.5, 0.5], 0.1, 5.0, 25)?;
    let optimal = collect_demos(&env.optimal_policy(), &env, 250, 7, "optimal")?;
    let noisy_policy = NoisyPolicyWrapper::for_env(env.optimal_policy(), 0.6, &env)?;
    let imperfect = collect_demos(&noisy_policy, &env, 500, 9, "d0.6")?;

    let bc_cfg = BcConfig {
        epochs: 200,
        batch_size: 128,
        learning_rate: 1e-3,
        hidden: vec![100, 100],
        action_bounds: Some((env.action_low().to_vec(), env.action_high().to_vec())),
    };
    let train_and_eval = |name: &str, data: &dpil::demos::DemoSet| -> dpil::Result<()> {
        let merged = mix_demosets(&[data.clone(), optimal.clone()])?;
        let bc = bc_train(&merged, &bc_cfg, 33)?;
        let est = evaluate_policy(&bc.policy, &env, 100, 0.995, 0xE7A1)?;
        println!("{name:12} return {:7.2} +- {:.2}", est.mean_undiscounted, est.stderr);
        Ok(())
    };

    train_and_eval("raw", &imperfect)?;
    for (name, kind) in [
        ("mean-filter", FilterKind::Mean { window: 5 }),
        ("med-filter", FilterKind::Median { window: 5 }),
        ("g-filter", FilterKind::Gaussian { sigma: 1.0 }),
    ] {
        let filtered = filter_denoise(&imperfect, kind, FilterTarget::ActionsOnly)?;
        train_and_eval(name, &filtered)?;
    }

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
    println!("training denoiser for the diffusion purifier ...");
    let denoiser = train_denoiser(&optimal, &schedule, &dcfg, 13)?;
    let purified = purify_dataset(&imperfect, &PurifyConfig::new(0.1)?, &denoiser, 21, 1)?;
    train_and_eval("dp-purify", &purified)?;
    Ok(())
}
