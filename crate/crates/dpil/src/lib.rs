//! Diffusion-purified imitation learning (DP-IL).
//!
//! Imperfect expert demonstrations are purified by a two-step diffusion
//! process — forward-diffuse to a chosen step, then reverse-denoise back —
//! before running behavioral cloning (DP-BC) or adversarial imitation
//! learning (DP-GAIL) on them. Everything runs at desk scale on built-in toy
//! environments with analytic optimal controllers, and every stochastic
//! operation is reproducible bit-for-bit from a root seed.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`nn`]: dense network engine with exact gradients and Adam.
//! - [`diffusion`]: DDPM noise schedule, denoiser training, purification.
//! - [`demos`]: demonstration datasets, imperfect-demo generators, filter
//!   baselines, and line-delimited JSON serialization.
//! - [`imitation`]: Gaussian policy, BC, discriminator, REINFORCE, GAIL.
//! - [`envs`]: toy environments (`PointReach`, `LinearTrack`) and policy
//!   value estimation.
//! - [`eval`]: MMD two-sample distance, divergence-decay curves, theoretical
//!   bound diagnostics, the t* sweep, and Welch's t-test.
//! - [`harness`]: run configuration, the end-to-end pipeline, and report
//!   emission. The `dpil` binary is a thin CLI over this module.
//!
//! The `examples/` directory contains one runnable example per capability;
//! start with `dp_bc.rs` for the end-to-end offline flow.

pub mod demos;
pub mod diffusion;
pub mod envs;
pub mod error;
pub mod eval;
pub mod harness;
pub mod imitation;
pub mod nn;
pub mod seed;

pub use error::{Error, Result};
