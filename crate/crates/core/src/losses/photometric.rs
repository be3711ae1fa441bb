use super::ssim::{Padding, SsimField, SsimParams};
use crate::error::{Error, Result};
use crate::image::Image;

/// Weight of the SSIM term in the photometric loss.
pub const DEFAULT_ALPHA: f64 = 0.85;

/// Scalar loss with its per-pixel map.
#[derive(Clone, Debug, PartialEq)]
pub struct LossMap {
    pub mean: f64,
    pub map: Image<f64>,
}

fn check(src: &Image<f64>, recon: &Image<f64>, alpha: f64, params: &SsimParams) -> Result<()> {
    if !src.same_shape(recon) {
        return Err(Error::DimensionMismatch {
            what: "reconstruction",
            expected: src.dims(),
            actual: recon.dims(),
        });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if params.padding != Padding::Reflect {
        return Err(Error::invalid(
            "photometric loss needs a full-size SSIM map (reflect padding)",
        ));
    }
    Ok(())
}

/// Photometric reconstruction error
/// `alpha / 2 · (1 - SSIM) + (1 - alpha) · |src - recon|` per pixel and
/// channel, averaged over channels for the map and over everything for the
/// scalar. SSIM uses [`SsimParams::photometric`].
pub fn photometric_loss(src: &Image<f64>, recon: &Image<f64>, alpha: f64) -> Result<LossMap> {
    photometric_loss_with(src, recon, alpha, &SsimParams::photometric())
}

pub fn photometric_loss_with(src: &Image<f64>, recon: &Image<f64>, alpha: f64, params: &SsimParams) -> Result<LossMap> {
    check(src, recon, alpha, params)?;
    let field = SsimField::compute(src, recon, params)?;
    let ch = src.channels();
    let data: Vec<f64> = field
        .stats
        .chunks_exact(ch)
        .zip(src.data().chunks_exact(ch).zip(recon.data().chunks_exact(ch)))
        .map(|(stats, (s, r))| {
            let per_channel: f64 = stats
                .iter()
                .zip(s.iter().zip(r))
                .map(|(st, (a, b))| alpha / 2.0 * (1.0 - st.ssim) + (1.0 - alpha) * (a - b).abs())
                .sum();
            per_channel / ch as f64
        })
        .collect();
    let map = Image::from_vec(src.width(), src.height(), 1, data)?;
    Ok(LossMap { mean: map.mean(), map })
}

/// Gradient of the scalar photometric loss with respect to `src` and `recon`.
pub fn photometric_gradient(
    src: &Image<f64>,
    recon: &Image<f64>,
    alpha: f64,
    params: &SsimParams,
) -> Result<(Image<f64>, Image<f64>)> {
    check(src, recon, alpha, params)?;
    let field = SsimField::compute(src, recon, params)?;
    let n = src.data().len() as f64;
    let upstream = vec![-alpha / (2.0 * n); field.stats.len()];
    let (mut gs, mut gr) = field.backward(src, recon, &upstream);
    let scale = (1.0 - alpha) / n;
    for (i, (a, b)) in src.data().iter().zip(recon.data()).enumerate() {
        let sign = (a - b).signum() * f64::from(a != b);
        gs.data_mut()[i] += scale * sign;
        gr.data_mut()[i] -= scale * sign;
    }
    Ok((gs, gr))
}
