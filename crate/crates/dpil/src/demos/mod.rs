//! Demonstration data: the `Transition`/`DemoSet` model, imperfect-demo
//! generators (action noise, early checkpoints, mixing), classical filter
//! baselines, and serialization.

pub mod filter;
pub mod generate;
pub mod io;
pub mod types;

pub use filter::{filter_denoise, FilterKind, FilterTarget};
pub use generate::{
    collect_checkpoint_demos, collect_demos, mix_demosets, wrap_noisy, NoisyPolicyWrapper,
};
pub use io::{export_csv, load_demos, save_demos};
pub use types::{DemoSet, GeneratorMeta, Transition};
