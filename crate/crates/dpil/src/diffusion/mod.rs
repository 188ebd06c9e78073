//! DDPM machinery: noise schedule, denoiser training, forward diffusion,
//! reverse denoising, and the two-step purification of demonstrations.

pub mod denoiser;
pub mod purify;
pub mod schedule;

pub use denoiser::{
    epsilon_prediction_loss, gaussian_score_denoiser, time_embedding, train_denoiser,
    zero_denoiser, Denoiser, DenoiserTrainConfig, NoisePredictor, NormStats,
};
pub use purify::{
    forward_diffuse, forward_diffuse_with, purify, purify_dataset, reverse_denoise,
    reverse_denoise_with, FixedNoise, PurifyConfig, PurifyManifest,
};
pub use schedule::{t_to_step, NoiseSchedule};
