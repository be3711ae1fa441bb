use crate::error::{Error, Result};
use crate::image::{DepthMap, Image};

/// Mean-normalised inverse depth `d = mean(D) / D`, with the mean taken over
/// valid pixels. Invalid pixels get `d = 0`.
pub fn mean_normalized_inverse_depth(depth: &DepthMap) -> Result<Image<f64>> {
    let mean = depth
        .valid_mean()
        .ok_or_else(|| Error::invalid("depth map has no valid pixels"))?;
    Image::from_vec(
        depth.width(),
        depth.height(),
        1,
        depth
            .values()
            .iter()
            .map(|&d| if d > 0.0 { mean / d } else { 0.0 })
            .collect(),
    )
}

fn check(d: &Image<f64>, image: &Image<f64>) -> Result<()> {
    if d.channels() != 1 {
        return Err(Error::invalid("smoothness loss expects a single-channel map"));
    }
    if d.dims() != image.dims() {
        return Err(Error::DimensionMismatch {
            what: "guide image",
            expected: d.dims(),
            actual: image.dims(),
        });
    }
    Ok(())
}

/// Channel-mean absolute difference between two guide pixels and its sign
/// vector (with respect to the second pixel).
#[inline]
fn guide_step(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (y - x).abs()).sum::<f64>() / a.len() as f64
}

/// Edge-aware smoothness
/// `mean |∂x d| e^{-|∂x I|} + mean |∂y d| e^{-|∂y I|}` with forward
/// differences; `|∂I|` is the channel mean of the absolute image gradient.
/// Each mean runs over the pixels where its difference is defined.
pub fn smoothness_loss(d: &Image<f64>, image: &Image<f64>) -> Result<f64> {
    check(d, image)?;
    let (w, h) = d.dims();
    let mut total = 0.0;
    if w > 1 {
        let mut sum = 0.0;
        for v in 0..h {
            for u in 0..w - 1 {
                let dd = (d.get(u + 1, v, 0) - d.get(u, v, 0)).abs();
                sum += dd * (-guide_step(image.pixel(u, v), image.pixel(u + 1, v))).exp();
            }
        }
        total += sum / ((w - 1) * h) as f64;
    }
    if h > 1 {
        let mut sum = 0.0;
        for v in 0..h - 1 {
            for u in 0..w {
                let dd = (d.get(u, v + 1, 0) - d.get(u, v, 0)).abs();
                sum += dd * (-guide_step(image.pixel(u, v), image.pixel(u, v + 1))).exp();
            }
        }
        total += sum / (w * (h - 1)) as f64;
    }
    Ok(total)
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Gradient of [`smoothness_loss`] with respect to `d` and to the guide image.
pub fn smoothness_gradient(d: &Image<f64>, image: &Image<f64>) -> Result<(Image<f64>, Image<f64>)> {
    check(d, image)?;
    let (w, h) = d.dims();
    let ch = image.channels();
    let mut gd = Image::<f64>::new(w, h, 1);
    let mut gi = Image::<f64>::new(w, h, ch);

    let mut pair = |(u0, v0): (usize, usize), (u1, v1): (usize, usize), norm: f64| {
        let diff = d.get(u1, v1, 0) - d.get(u0, v0, 0);
        let weight = (-guide_step(image.pixel(u0, v0), image.pixel(u1, v1))).exp();
        let g = sign(diff) * weight / norm;
        gd.set(u1, v1, 0, gd.get(u1, v1, 0) + g);
        gd.set(u0, v0, 0, gd.get(u0, v0, 0) - g);
        // d/dI of |Δd| e^{-mean_c |ΔI_c|}
        let outer = -diff.abs() * weight / (norm * ch as f64);
        for c in 0..ch {
            let s = sign(image.get(u1, v1, c) - image.get(u0, v0, c));
            gi.set(u1, v1, c, gi.get(u1, v1, c) + outer * s);
            gi.set(u0, v0, c, gi.get(u0, v0, c) - outer * s);
        }
    };
    if w > 1 {
        let norm = ((w - 1) * h) as f64;
        for v in 0..h {
            for u in 0..w - 1 {
                pair((u, v), (u + 1, v), norm);
            }
        }
    }
    if h > 1 {
        let norm = (w * (h - 1)) as f64;
        for v in 0..h - 1 {
            for u in 0..w {
                pair((u, v), (u, v + 1), norm);
            }
        }
    }
    Ok((gd, gi))
}
