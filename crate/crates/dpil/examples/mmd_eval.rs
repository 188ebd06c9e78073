//! MMD table across noise levels: distance of imperfect and purified
//! demonstrations from the optimal distribution.
//!
//! ```bash
//! cargo run --example mmd_eval
//! ```

use dpil::demos::{collect_demos, NoisyPolicyWrapper};
use dpil::diffusion::{purify_dataset, train_denoiser, DenoiserTrainConfig, NoiseSchedule, PurifyConfig};
use dpil::envs::PointReach;
use dpil::eval::{mmd, resolve_bandwidth, Bandwidth, MmdConfig};

fn main() -> dpil::Result<()> {
    let env = PointReach::new([0.5, 0.5], 0.1, 5.0, 25)?;
    let optimal = collect_demos(&env.optimal_policy(), &env, 250, 7, "optimal")?;
    let reference = collect_demos(&env.optimal_policy(), &env, 500, 8, "optimal_eval")?;

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

    println!("{:8} {:6} {:>14} {:>14}", "dataset", "t*", "MMD(imperfect)", "MMD(purified)");
    // Noisier datasets get a larger purification time.
    for (delta, t_star) in [(0.6, 0.1), (0.4, 0.05), (0.25, 0.03)] {
        let noisy_policy = NoisyPolicyWrapper::for_env(env.optimal_policy(), delta, &env)?;
        let raw = collect_demos(&noisy_policy, &env, 500, 9 + (delta * 100.0) as u64, "noisy")?;
        let purified = purify_dataset(&raw, &PurifyConfig::new(t_star)?, &denoiser, 21, 1)?;
        let sigma = resolve_bandwidth(&reference.rows(), &raw.rows(), Bandwidth::MedianHeuristic)?;
        let cfg = MmdConfig { bandwidth: Bandwidth::Fixed(sigma) };
        let before = mmd(&reference.rows(), &raw.rows(), &cfg)?;
        let after = mmd(&reference.rows(), &purified.rows(), &cfg)?;
        println!("d{delta:<7} {t_star:<6} {before:>14.4} {after:>14.4}");
    }
    Ok(())
}
