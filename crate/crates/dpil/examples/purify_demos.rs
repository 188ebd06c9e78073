//! Purify noisy demonstrations with a trained denoiser and measure how much
//! closer they move to the optimal distribution (MMD before/after).
//!
//! ```bash
//! cargo run --example purify_demos
//! ```

use dpil::demos::{collect_demos, NoisyPolicyWrapper};
use dpil::diffusion::{purify_dataset, train_denoiser, DenoiserTrainConfig, NoiseSchedule, PurifyConfig};
use dpil::envs::PointReach;
use dpil::eval::{mmd, resolve_bandwidth, Bandwidth, MmdConfig};

fn main() -> dpil::Result<()> {
    let env = PointReach::new([0.5, 0.5], 0.1, 5.0, 25)?;
    let optimal = collect_demos(&env.optimal_policy(), &env, 250, 7, "optimal")?;
    let reference = collect_demos(&env.optimal_policy(), &env, 500, 8, "optimal_eval")?;
    let noisy_policy = NoisyPolicyWrapper::for_env(env.optimal_policy(), 0.6, &env)?;
    let imperfect = collect_demos(&noisy_policy, &env, 500, 9, "d0.6")?;

    let schedule = NoiseSchedule::linear(1000, 1e-4, 0.02)?;
    let cfg = DenoiserTrainConfig {
        epochs: 1000,
        batch_size: 64,
        learning_rate: 1e-3,
        n_layers: 4,
        hidden_width: 64,
        time_embed_dim: 16,
        dropout: 0.1,
        ..DenoiserTrainConfig::default()
    };
    println!("training denoiser on {} optimal transitions ...", optimal.len());
    let denoiser = train_denoiser(&optimal, &schedule, &cfg, 13)?;

    let purify_cfg = PurifyConfig::new(0.1)?;
    println!(
        "purifying {} transitions at t* = {} (i* = {}) ...",
        imperfect.len(),
        purify_cfg.t_star,
        purify_cfg.i_star(schedule.t_max())
    );
    let purified = purify_dataset(&imperfect, &purify_cfg, &denoiser, 21, 1)?;

    let sigma = resolve_bandwidth(&reference.rows(), &imperfect.rows(), Bandwidth::MedianHeuristic)?;
    let mmd_cfg = MmdConfig { bandwidth: Bandwidth::Fixed(sigma) };
    let before = mmd(&reference.rows(), &imperfect.rows(), &mmd_cfg)?;
    let after = mmd(&reference.rows(), &purified.rows(), &mmd_cfg)?;
    println!("MMD(optimal, imperfect) = {before:.4}");
    println!("MMD(optimal, purified)  = {after:.4}");

    let t = &imperfect.transitions[0];
    let p = &purified.transitions[0];
    println!(
        "first transition: action ({:+.3}, {:+.3}) -> ({:+.3}, {:+.3})",
        t.action[0], t.action[1], p.action[0], p.action[1]
    );
    Ok(())
}
