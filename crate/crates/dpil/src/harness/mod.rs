//! Configuration, pipeline orchestration, and report emission. The `dpil`
//! binary is a thin CLI over this module.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{
    delta_label, validate_config, BuiltEnv, DemosConfig, DiffusionConfig, EnvConfig, EvalSection,
    LearnerConfig, PurifySection, RunConfig,
};
pub use pipeline::{run_pipeline, Pipeline, StageName};
pub use report::{
    emit_report, write_atomic, EvalReport, FilterBaselineRow, MmdRow, PolicyValueRow, TtestRow,
};
