//! Sweep the purification time t*: too little leaves the noise in, too much
//! destroys the demonstrations. Noisier data wants a larger t*.
//!
//! ```bash
//! cargo run --example t_star_sweep
//! ```

use dpil::demos::{collect_demos, NoisyPolicyWrapper};
use dpil::diffusion::{train_denoiser, DenoiserTrainConfig, NoiseSchedule};
use dpil::envs::{Environment, PointReach};
use dpil::eval::{t_star_sweep, SweepConfig};
use dpil::imitation::BcConfig;

fn main() -> dpil::Result<()> {
    let env = PointReach::new([0.5, 0.5], 0.1, 5.0, 25)?;
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
    println!("training denoiser ...");
    let denoiser = train_denoiser(&optimal, &schedule, &dcfg, 13)?;

    let sweep_cfg = SweepConfig {
        t_grid: vec![0.005, 0.01, 0.03, 0.05, 0.1, 0.2],
        n_seeds: 1,
        bc: BcConfig {
            epochs: 200,
            batch_size: 128,
            learning_rate: 1e-3,
            hidden: vec![100, 100],
            action_bounds: Some((env.action_low().to_vec(), env.action_high().to_vec())),
        },
        n_eval_episodes: 100,
        eval_gamma: 0.995,
        workers: 1,
    };

    for delta in [0.6, 0.25] {
        let noisy_policy = NoisyPolicyWrapper::for_env(env.optimal_policy(), delta, &env)?;
        let raw = collect_demos(&noisy_policy, &env, 500, (delta * 100.0) as u64, "noisy")?;
        println!("sweeping t* for delta = {delta} ...");
        let result = t_star_sweep(&optimal, &raw, &denoiser, &env, &sweep_cfg, 42)?;
        for row in &result.rows {
            println!("  t* = {:<6} return {:7.2} +- {:.2}", row.t_star, row.mean_return, row.stderr);
        }
        println!("  best t* for delta {delta}: {}", result.argmax_t_star);
    }
    Ok(())
}
