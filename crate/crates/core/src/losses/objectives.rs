use serde::{Deserialize, Serialize};

use super::photometric::{photometric_loss_with, DEFAULT_ALPHA};
use super::smoothness::smoothness_loss;
use super::ssim::{ssim, SsimParams};
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossTerm {
    pub name: &'static str,
    pub value: f64,
    pub weight: f64,
}

/// Named loss terms and their weighted sum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub terms: Vec<LossTerm>,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(terms: Vec<LossTerm>) -> Self {
        let total = terms.iter().map(|t| t.weight * t.value).sum();
        Self { terms, total }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthLossWeights {
    pub alpha: f64,
    pub smoothness: f64,
    pub ssim: SsimParams,
}

impl Default for DepthLossWeights {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            smoothness: 1e-3,
            ssim: SsimParams::photometric(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthLoss {
    pub breakdown: LossBreakdown,
    /// Per-pixel indicator: the reconstruction beats the raw target image.
    pub selected: Vec<bool>,
}

/// Self-supervised depth objective: the photometric error of the
/// reconstruction, kept only at pixels where it is strictly lower than the
/// error of the unwarped target image, plus weighted edge-aware smoothness
/// of `d` guided by `src`. The masked term is averaged over all pixels.
pub fn depth_loss(
    src: &Image<f64>,
    recon: &Image<f64>,
    target: &Image<f64>,
    d: &Image<f64>,
    weights: &DepthLossWeights,
) -> Result<DepthLoss> {
    let warped = photometric_loss_with(src, recon, weights.alpha, &weights.ssim)?;
    let raw = photometric_loss_with(src, target, weights.alpha, &weights.ssim)?;
    let selected: Vec<bool> = warped
        .map
        .data()
        .iter()
        .zip(raw.map.data())
        .map(|(w, r)| w < r)
        .collect();
    let masked = warped
        .map
        .data()
        .iter()
        .zip(&selected)
        .map(|(&l, &m)| if m { l } else { 0.0 })
        .sum::<f64>()
        / selected.len() as f64;
    let smooth = smoothness_loss(d, src)?;
    Ok(DepthLoss {
        breakdown: LossBreakdown::new(vec![
            LossTerm {
                name: "photometric",
                value: masked,
                weight: 1.0,
            },
            LossTerm {
                name: "smoothness",
                value: smooth,
                weight: weights.smoothness,
            },
        ]),
        selected,
    })
}

/// Caller-supplied activation tensor (e.g. discriminator or VGG features).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.iter().product::<usize>() != data.len() {
            return Err(Error::invalid(format!(
                "feature shape {shape:?} does not match {} values",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("feature map contains non-finite values"));
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Euclidean distance to a feature map of the same shape.
    pub fn l2_distance(&self, other: &FeatureMap) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::invalid(format!(
                "feature shapes differ: {:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionWeights {
    pub discriminator: f64,
    pub generator: f64,
    pub perceptual: f64,
    pub ssim: SsimParams,
}

impl Default for CompletionWeights {
    fn default() -> Self {
        Self {
            discriminator: 1.0,
            generator: 100.0,
            perceptual: 100.0,
            ssim: SsimParams::photometric(),
        }
    }
}

/// Completion-network objective from discriminator scores, images and
/// feature pairs:
///
/// * `discriminator`: `(d_real - 1)² + d_fake²` (least-squares GAN)
/// * `generator`: `1 - SSIM(target, generated) + mean |target - generated|`
/// * `perceptual`: sum of Euclidean distances over the feature pairs
pub fn completion_losses(
    d_real: f64,
    d_fake: f64,
    target: &Image<f64>,
    generated: &Image<f64>,
    features: &[(FeatureMap, FeatureMap)],
    weights: &CompletionWeights,
) -> Result<LossBreakdown> {
    let discriminator = (d_real - 1.0).powi(2) + d_fake.powi(2);
    let structural = ssim(target, generated, &weights.ssim)?.mean;
    let l1 = super::metrics::l1_metric(target, generated)?;
    let generator = (1.0 - structural) + l1;
    let perceptual = features.iter().map(|(a, b)| a.l2_distance(b)).sum::<Result<f64>>()?;
    Ok(LossBreakdown::new(vec![
        LossTerm {
            name: "discriminator",
            value: discriminator,
            weight: weights.discriminator,
        },
        LossTerm {
            name: "generator",
            value: generator,
            weight: weights.generator,
        },
        LossTerm {
            name: "perceptual",
            value: perceptual,
            weight: weights.perceptual,
        },
    ]))
}
