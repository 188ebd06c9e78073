//! Train a denoising diffusion model on optimal demonstrations and save a
//! checkpoint.
//!
//! ```bash
//! cargo run --example train_diffusion
//! ```

use dpil::demos::collect_demos;
use dpil::diffusion::{train_denoiser, DenoiserTrainConfig, NoiseSchedule};
use dpil::envs::PointReach;
use dpil::nn::save_checkpoint;

fn main() -> dpil::Result<()> {
    let env = PointReach::new([0.5, 0.5], 0.1, 5.0, 25)?;
    let optimal = collect_demos(&env.optimal_policy(), &env, 250, 7, "optimal")?;
    println!(
        "collected {} optimal transitions over {} episodes (mean return {:.2})",
        optimal.len(),
        optimal.episodes().len(),
        optimal.mean_episode_return()
    );

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
    println!("training denoiser: T = {}, {} epochs ...", schedule.t_max(), cfg.epochs);
    let denoiser = train_denoiser(&optimal, &schedule, &cfg, 13)?;
    println!(
        "final epoch loss {:.4}; schedule hash {:016x}",
        denoiser.final_train_loss.unwrap(),
        denoiser.schedule.content_hash()
    );

    let path = std::env::temp_dir().join("dpil_example_denoiser.json");
    save_checkpoint(&path, "denoiser", vec!["root:7".into()], &denoiser)?;
    println!("checkpoint written to {}", path.display());
    Ok(())
}
