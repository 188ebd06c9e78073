//! `dpil` — diffusion-purified imitation learning CLI.
//!
//! Thin wrapper over the library pipeline. Exit codes: 0 success,
//! 1 validation error, 2 runtime error. `DPIL_SEED` and `DPIL_OUT` override
//! the config file; explicit flags override both.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dpil::error::Error;
use dpil::harness::{
    emit_report, run_pipeline, validate_config, Pipeline, RunConfig, StageName,
};

#[derive(Parser)]
#[command(name = "dpil", version, about = "Diffusion-purified imitation learning at desk scale")]
struct Cli {
    /// Path to a JSON run config; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed override (beats DPIL_SEED and the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory override (beats DPIL_OUT and the config file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker count for parallel stages; must not change results.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate optimal and imperfect demonstration datasets.
    GenDemos,
    /// Train the denoising diffusion model on the optimal demos.
    TrainDiffusion,
    /// Purify every imperfect dataset with the trained denoiser.
    Purify,
    /// Train DP-BC and the BC-all baseline.
    TrainBc,
    /// Train DP-GAIL and the GAIL-all baseline.
    TrainGail,
    /// MMD of imperfect and purified datasets against optimal demos.
    EvalMmd,
    /// Sweep the purification time t* and report returns per grid point.
    SweepT,
    /// Mean/median/Gaussian filter baselines trained with BC.
    FilterBaseline,
    /// One-sided Welch t-test between two return samples (one float per
    /// line); prints the p-value for H1: mean(a) > mean(b).
    Ttest { file_a: PathBuf, file_b: PathBuf },
    /// Run the full pipeline and write report.json plus CSV tables.
    Run,
    /// Write the default config to stdout.
    DefaultConfig,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => validate_config(path)?,
        None => RunConfig::default(),
    };
    if let Ok(seed) = std::env::var("DPIL_SEED") {
        cfg.seed = seed
            .parse()
            .map_err(|e| Error::Validation(vec![format!("DPIL_SEED: {e}")]))?;
    }
    if let Ok(out) = std::env::var("DPIL_OUT") {
        cfg.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.display().to_string();
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_returns(path: &Path) -> Result<Vec<f64>, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        out.push(line.parse::<f64>().map_err(|e| Error::Parse {
            record: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::DefaultConfig => {
            println!("{}", serde_json::to_string_pretty(&RunConfig::default())?);
            return Ok(());
        }
        Command::Ttest { file_a, file_b } => {
            let a = read_returns(file_a)?;
            let b = read_returns(file_b)?;
            let p = dpil::eval::welch_t_test(&a, &b)?;
            println!("p_value={p}");
            return Ok(());
        }
        _ => {}
    }

    let cfg = load_config(&cli)?;
    match cli.command {
        Command::GenDemos => {
            let report = Pipeline::new(cfg)?.run_until(StageName::Demos)?;
            print_stage(&report, "demos");
        }
        Command::TrainDiffusion => {
            let report = Pipeline::new(cfg)?.run_until(StageName::Diffusion)?;
            print_stage(&report, "diffusion");
        }
        Command::Purify => {
            let report = Pipeline::new(cfg)?.run_until(StageName::Purify)?;
            print_stage(&report, "purify");
        }
        Command::TrainBc => {
            let mut cfg = cfg;
            cfg.learner.kind = "bc".into();
            let report = Pipeline::new(cfg)?.run_until(StageName::Learner)?;
            print_stage(&report, "learner");
        }
        Command::TrainGail => {
            let mut cfg = cfg;
            cfg.learner.kind = "gail".into();
            let report = Pipeline::new(cfg)?.run_until(StageName::Learner)?;
            print_stage(&report, "learner");
        }
        Command::EvalMmd => {
            let pipeline = Pipeline::new(cfg)?.advance_until(StageName::Purify)?;
            let rows = pipeline.compute_mmd_rows()?;
            println!("dataset,mmd_imperfect,mmd_purified");
            for r in &rows {
                let p = r.mmd_purified.map(|v| v.to_string()).unwrap_or_default();
                println!("{},{},{}", r.dataset, r.mmd_imperfect, p);
            }
            let mut report = pipeline.report().clone();
            report
                .stages
                .insert("eval".into(), serde_json::json!({ "mmd": rows }));
            emit_report(&report, pipeline.out_dir())?;
        }
        Command::SweepT => {
            let mut cfg = cfg;
            if cfg.purify.sweep_grid.is_none() {
                cfg.purify.sweep_grid = Some(vec![0.005, 0.01, 0.03, 0.05, 0.1, 0.2]);
            }
            let pipeline = Pipeline::new(cfg)?.advance_until(StageName::Purify)?;
            let sweep = pipeline
                .compute_sweep()?
                .expect("sweep grid was set above");
            println!("t_star,mean_return,stderr,seed_count");
            for r in &sweep.rows {
                println!("{},{},{},{}", r.t_star, r.mean_return, r.stderr, r.seed_count);
            }
            println!("argmax_t_star={}", sweep.argmax_t_star);
            let mut report = pipeline.report().clone();
            report.stages.insert(
                "eval".into(),
                serde_json::json!({
                    "sweep": sweep.rows,
                    "sweep_argmax_t_star": sweep.argmax_t_star,
                }),
            );
            emit_report(&report, pipeline.out_dir())?;
        }
        Command::FilterBaseline => {
            let pipeline = Pipeline::new(cfg)?.advance_until(StageName::Demos)?;
            let rows = pipeline.compute_filter_baselines()?;
            println!("filter,mean_return,stderr");
            for r in &rows {
                println!("{},{},{}", r.filter, r.mean_return, r.stderr);
            }
            let mut report = pipeline.report().clone();
            report
                .stages
                .insert("eval".into(), serde_json::json!({ "filter_baselines": rows }));
            emit_report(&report, pipeline.out_dir())?;
        }
        Command::Run => {
            let report = run_pipeline(&cfg)?;
            for (stage, ms) in &report.timings_ms {
                eprintln!("stage {stage}: {ms} ms");
            }
            println!("report written to {}/report.json", cfg.out_dir);
        }
        Command::DefaultConfig | Command::Ttest { .. } => unreachable!(),
    }
    Ok(())
}

fn print_stage(report: &dpil::harness::EvalReport, stage: &str) {
    if let Some(value) = report.stages.get(stage) {
        println!(
            "{}",
            serde_json::to_string_pretty(value).unwrap_or_else(|_| value.to_string())
        );
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Validation(_)
        | Error::RejectedInput(_)
        | Error::Parse { .. }
        | Error::DimMismatch { .. } => 1,
        Error::Stage { source, .. } => exit_code_for(source),
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
