//! Imitation learners: offline behavioral cloning (DP-BC) and online
//! adversarial imitation (DP-GAIL), both consuming purified or raw demos.

pub mod bc;
pub mod discriminator;
pub mod gail;
pub mod policy;
pub mod reinforce;

pub use bc::{bc_train, BcConfig, BcResult};
pub use discriminator::{
    discriminator_objective, discriminator_update, sigmoid, Discriminator,
};
pub use gail::{gail_train, GailConfig, GailIterStats, GailResult};
pub use policy::{policy_log_prob, GaussianPolicy, LOG_STD_MAX, LOG_STD_MIN};
pub use reinforce::{
    policy_gradient_step, returns_to_go, train_reinforce, OnPolicyStep, PolicySnapshot,
    ReinforceConfig,
};
