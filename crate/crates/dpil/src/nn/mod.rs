//! Minimal feed-forward network engine: forward pass, exact analytic
//! gradients, and an Adam optimizer. Shared by the denoiser, the policies,
//! and the discriminator.

pub mod activation;
pub mod adam;
pub mod checkpoint;
pub mod mlp;

pub use activation::Activation;
pub use adam::{adam_step_mlp, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use mlp::{BatchStats, DropoutPlan, Gradients, Layer, LayerSpec, Mlp, Mode};
