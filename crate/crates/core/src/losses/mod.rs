//! Training losses and evaluation metrics as pure functions over
//! caller-supplied images, disparities, discriminator scores and features.
//!
//! Images here are `Image<f64>` with any number of channels; convert colour
//! images with [`crate::image::RgbImage::to_f64`]. `‖·‖₁` terms are means,
//! not sums, so weights are independent of image size.

mod metrics;
mod objectives;
mod photometric;
mod smoothness;
mod ssim;

pub use metrics::{l1_metric, masked_l1};
pub use objectives::{
    completion_losses, depth_loss, CompletionWeights, DepthLoss, DepthLossWeights, FeatureMap, LossBreakdown, LossTerm,
};
pub use photometric::{photometric_gradient, photometric_loss, photometric_loss_with, LossMap, DEFAULT_ALPHA};
pub use smoothness::{mean_normalized_inverse_depth, smoothness_gradient, smoothness_loss};
pub use ssim::{ssim, ssim_gradient, Padding, SsimParams, SsimResult, WindowKind};
