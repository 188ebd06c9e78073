//! Distribution-distance and statistical evaluation: MMD, the
//! divergence-decay diagnostic, bound calculators, the t* sweep, and
//! Welch's t-test.

pub mod bounds;
pub mod decay;
pub mod mmd;
pub mod sweep;
pub mod ttest;

pub use bounds::{c_varpi, tv_bound, zeta, BoundInputs, TvBound};
pub use decay::{divergence_decay_curve, DecayPoint};
pub use mmd::{mmd, mmd_squared_unbiased, resolve_bandwidth, Bandwidth, MmdConfig, PooledGram};
pub use sweep::{t_star_sweep, SweepConfig, SweepResult, SweepRow};
pub use ttest::{student_t_sf, welch_t_test};
