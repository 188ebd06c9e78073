//! Forward-diffusion divergence decay: the MMD between diffused optimal and
//! diffused imperfect samples shrinks as the diffusion time grows.
//!
//! ```bash
//! cargo run --example divergence_decay
//! ```

use dpil::demos::{collect_demos, NoisyPolicyWrapper};
use dpil::diffusion::NoiseSchedule;
use dpil::envs::PointReach;
use dpil::eval::divergence_decay_curve;

fn main() -> dpil::Result<()> {
    let env = PointReach::new([0.5, 0.5], 0.1, 5.0, 25)?;
    let optimal = collect_demos(&env.optimal_policy(), &env, 500, 8, "optimal")?;
    let noisy_policy = NoisyPolicyWrapper::for_env(env.optimal_policy(), 0.6, &env)?;
    let imperfect = collect_demos(&noisy_policy, &env, 500, 9, "d0.6")?;

    let schedule = NoiseSchedule::linear(1000, 1e-4, 0.02)?;
    let grid: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let curve = divergence_decay_curve(&optimal, &imperfect, &schedule, &grid, 256, 60, 42)?;

    println!("{:>5} {:>8} {:>10}", "t", "MMD", "null std");
    for point in &curve {
        let bar = "#".repeat((point.mmd * 250.0) as usize);
        println!("{:>5.1} {:>8.4} {:>10.4}  {bar}", point.t, point.mmd, point.null_std);
    }
    Ok(())
}
