//! The end-to-end pipeline from a `RunConfig`: generate demos, train the
//! denoiser, purify, train DP-BC and BC-all, evaluate, and emit the report
//! plus CSV tables. Equivalent to `dpil run --config <file>`.
//!
//! ```bash
//! cargo run --example full_pipeline
//! ```

use dpil::harness::{run_pipeline, RunConfig};

fn main() -> dpil::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.seed = 42;
    cfg.out_dir = std::env::temp_dir()
        .join("dpil_example_pipeline")
        .display()
        .to_string();
    // Shrink the published defaults (T = 1000, thousands of epochs) to a
    // sub-minute demonstration.
    cfg.env.horizon = 25;
    cfg.demos.n_optimal = 250;
    cfg.demos.n_imperfect = 300;
    cfg.demos.deltas = vec![0.6];
    cfg.demos.include_mixed = false;
    cfg.diffusion.train.epochs = 600;
    cfg.diffusion.train.learning_rate = 1e-3;
    cfg.diffusion.train.hidden_width = 64;
    cfg.diffusion.train.time_embed_dim = 16;
    cfg.learner.bc.epochs = 150;
    cfg.learner.bc.batch_size = 128;
    cfg.eval.n_mmd_samples = 300;
    cfg.eval.n_eval_episodes = 30;
    cfg.eval.ttest_pairs = vec![("dp_bc:d0.6".into(), "bc_all:d0.6".into())];

    let report = run_pipeline(&cfg)?;
    println!("stages completed:");
    for (stage, ms) in &report.timings_ms {
        println!("  {stage:10} {ms:>6} ms");
    }
    if let Some(eval) = report.stages.get("eval") {
        if let Some(values) = eval.get("policy_values") {
            println!("policy values:");
            for row in values.as_array().unwrap() {
                println!(
                    "  {:12} {:8.2}",
                    row["policy"].as_str().unwrap(),
                    row["mean_return"].as_f64().unwrap()
                );
            }
        }
        if let Some(ttest) = eval.get("ttest") {
            println!("t-tests: {ttest}");
        }
    }
    println!("artifacts under {}", cfg.out_dir);
    Ok(())
}
