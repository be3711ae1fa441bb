//! Windowed structural similarity with an analytic gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum WindowKind {
    Uniform,
    Gaussian { sigma: f64 },
}

/// How windows are placed near the image border.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    /// Only windows fully inside the image; the map shrinks by `window - 1`.
    Valid,
    /// Mirror the image about its edge pixels (edge not repeated); the map
    /// has the input size.
    Reflect,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub kind: WindowKind,
    pub c1: f64,
    pub c2: f64,
    pub padding: Padding,
}

impl SsimParams {
    /// 11×11 Gaussian (σ = 1.5), `C1 = 0.01²`, `C2 = 0.03²`, valid windows:
    /// the usual settings for image-quality evaluation on `[0, 1]` data.
    pub fn evaluation() -> Self {
        Self {
            window: 11,
            kind: WindowKind::Gaussian { sigma: 1.5 },
            c1: 0.01 * 0.01,
            c2: 0.03 * 0.03,
            padding: Padding::Valid,
        }
    }

    /// 3×3 box window with reflection padding, giving one SSIM value per
    /// pixel for use inside training losses.
    pub fn photometric() -> Self {
        Self {
            window: 3,
            kind: WindowKind::Uniform,
            c1: 0.01 * 0.01,
            c2: 0.03 * 0.03,
            padding: Padding::Reflect,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "SSIM window must be odd and >= 3, got {}",
                self.window
            )));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::invalid("SSIM stabilisers C1 and C2 must be positive"));
        }
        if let WindowKind::Gaussian { sigma } = self.kind {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::invalid(format!("Gaussian sigma must be positive, got {sigma}")));
            }
        }
        Ok(())
    }

    /// Normalised `window`×`window` weights, row-major.
    fn kernel(&self) -> Vec<f64> {
        let n = self.window;
        let r = (n / 2) as f64;
        let taps: Vec<f64> = match self.kind {
            WindowKind::Uniform => vec![1.0; n],
            WindowKind::Gaussian { sigma } => (0..n)
                .map(|i| (-((i as f64 - r).powi(2)) / (2.0 * sigma * sigma)).exp())
                .collect(),
        };
        let total: f64 = taps.iter().sum::<f64>().powi(2);
        let mut k = Vec::with_capacity(n * n);
        for a in &taps {
            for b in &taps {
                k.push(a * b / total);
            }
        }
        k
    }
}

impl Default for SsimParams {
    fn default() -> Self {
        Self::evaluation()
    }
}

/// Mean SSIM plus the per-pixel map (averaged over channels).
#[derive(Clone, Debug, PartialEq)]
pub struct SsimResult {
    pub mean: f64,
    pub map: Image<f64>,
}

/// Local statistics of one window, one channel.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct WindowStats {
    mu_a: f64,
    mu_b: f64,
    n1: f64,
    n2: f64,
    d1: f64,
    d2: f64,
    pub(crate) ssim: f64,
}

/// Per-channel SSIM statistics on the output grid.
pub(crate) struct SsimField {
    pub(crate) out_w: usize,
    pub(crate) out_h: usize,
    pub(crate) channels: usize,
    /// `(y * out_w + x) * channels + c`
    pub(crate) stats: Vec<WindowStats>,
    kernel: Vec<f64>,
    window: usize,
    padding: Padding,
    width: usize,
    height: usize,
}

#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    j as usize
}

impl SsimField {
    pub(crate) fn compute(a: &Image<f64>, b: &Image<f64>, p: &SsimParams) -> Result<Self> {
        p.validate()?;
        if !a.same_shape(b) {
            return Err(Error::DimensionMismatch {
                what: "SSIM operand",
                expected: a.dims(),
                actual: b.dims(),
            });
        }
        let (w, h) = a.dims();
        let r = p.window / 2;
        let too_small = match p.padding {
            Padding::Valid => w < p.window || h < p.window,
            Padding::Reflect => w <= r || h <= r,
        };
        if too_small {
            return Err(Error::WindowTooLarge {
                width: w,
                height: h,
                window: p.window,
            });
        }
        let (out_w, out_h) = match p.padding {
            Padding::Valid => (w - p.window + 1, h - p.window + 1),
            Padding::Reflect => (w, h),
        };
        let kernel = p.kernel();
        let ch = a.channels();
        let mut field = SsimField {
            out_w,
            out_h,
            channels: ch,
            stats: vec![WindowStats::default(); out_w * out_h * ch],
            kernel,
            window: p.window,
            padding: p.padding,
            width: w,
            height: h,
        };
        let (ad, bd) = (a.data(), b.data());
        for y in 0..out_h {
            for x in 0..out_w {
                for c in 0..ch {
                    let (mut ma, mut mb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                    field.for_each_tap(x, y, |j, wgt| {
                        let (va, vb) = (ad[j * ch + c], bd[j * ch + c]);
                        ma += wgt * va;
                        mb += wgt * vb;
                        saa += wgt * va * va;
                        sbb += wgt * vb * vb;
                        sab += wgt * va * vb;
                    });
                    let var_a = saa - ma * ma;
                    let var_b = sbb - mb * mb;
                    let cov = sab - ma * mb;
                    let n1 = 2.0 * ma * mb + p.c1;
                    let n2 = 2.0 * cov + p.c2;
                    let d1 = ma * ma + mb * mb + p.c1;
                    let d2 = var_a + var_b + p.c2;
                    field.stats[(y * out_w + x) * ch + c] = WindowStats {
                        mu_a: ma,
                        mu_b: mb,
                        n1,
                        n2,
                        d1,
                        d2,
                        ssim: (n1 * n2) / (d1 * d2),
                    };
                }
            }
        }
        Ok(field)
    }

    /// Calls `f(pixel_index, weight)` for every tap of the window producing
    /// output `(x, y)`.
    #[inline]
    fn for_each_tap(&self, x: usize, y: usize, mut f: impl FnMut(usize, f64)) {
        let n = self.window;
        let r = (n / 2) as isize;
        for dy in 0..n {
            for dx in 0..n {
                let (sx, sy) = match self.padding {
                    Padding::Valid => (x + dx, y + dy),
                    Padding::Reflect => (
                        reflect(x as isize + dx as isize - r, self.width),
                        reflect(y as isize + dy as isize - r, self.height),
                    ),
                };
                f(sy * self.width + sx, self.kernel[dy * n + dx]);
            }
        }
    }

    /// Channel-averaged SSIM map.
    pub(crate) fn map(&self) -> Image<f64> {
        let ch = self.channels as f64;
        let data = self
            .stats
            .chunks_exact(self.channels)
            .map(|s| s.iter().map(|w| w.ssim).sum::<f64>() / ch)
            .collect();
        Image::from_vec(self.out_w, self.out_h, 1, data).expect("sized above")
    }

    /// Back-propagates `upstream[(y * out_w + x) * channels + c]`, the
    /// derivative of a scalar with respect to each per-channel SSIM value,
    /// onto both input images.
    pub(crate) fn backward(&self, a: &Image<f64>, b: &Image<f64>, upstream: &[f64]) -> (Image<f64>, Image<f64>) {
        let ch = self.channels;
        let mut ga = Image::<f64>::new(self.width, self.height, ch);
        let mut gb = Image::<f64>::new(self.width, self.height, ch);
        let (ad, bd) = (a.data(), b.data());
        let (gad, gbd) = (ga.data_mut(), gb.data_mut());
        for y in 0..self.out_h {
            for x in 0..self.out_w {
                for c in 0..ch {
                    let i = (y * self.out_w + x) * ch + c;
                    let g = upstream[i];
                    if g == 0.0 {
                        continue;
                    }
                    let s = &self.stats[i];
                    // dS = S (dN1/N1 + dN2/N2 - dD1/D1 - dD2/D2)
                    let base_a = g * s.ssim * (2.0 * s.mu_b / s.n1 - 2.0 * s.mu_a / s.d1);
                    let base_b = g * s.ssim * (2.0 * s.mu_a / s.n1 - 2.0 * s.mu_b / s.d1);
                    let cross = g * s.ssim * 2.0 / s.n2;
                    let own = g * s.ssim * 2.0 / s.d2;
                    self.for_each_tap(x, y, |j, wgt| {
                        let k = j * ch + c;
                        let (va, vb) = (ad[k] - s.mu_a, bd[k] - s.mu_b);
                        gad[k] += wgt * (base_a + cross * vb - own * va);
                        gbd[k] += wgt * (base_b + cross * va - own * vb);
                    });
                }
            }
        }
        (ga, gb)
    }
}

/// Structural similarity of two equally shaped images. Each channel is
/// scored separately and the per-pixel map is the channel mean; the scalar
/// is the mean of that map.
pub fn ssim(a: &Image<f64>, b: &Image<f64>, params: &SsimParams) -> Result<SsimResult> {
    let field = SsimField::compute(a, b, params)?;
    let map = field.map();
    Ok(SsimResult { mean: map.mean(), map })
}

/// Gradient of the mean SSIM with respect to every value of `a` and `b`.
pub fn ssim_gradient(a: &Image<f64>, b: &Image<f64>, params: &SsimParams) -> Result<(Image<f64>, Image<f64>)> {
    let field = SsimField::compute(a, b, params)?;
    let n = field.stats.len() as f64;
    let upstream = vec![1.0 / n; field.stats.len()];
    Ok(field.backward(a, b, &upstream))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(w: usize, h: usize, c: usize, seed: u64) -> Image<f64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        Image::from_fn(w, h, c, |_, _, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    #[test]
    fn identical_images_score_exactly_one() {
        let a = noise(16, 13, 3, 1);
        for p in [SsimParams::evaluation(), SsimParams::photometric()] {
            let r = ssim(&a, &a, &p).unwrap();
            assert_eq!(r.mean, 1.0);
            assert!(r.map.data().iter().all(|&s| s == 1.0));
        }
    }

    #[test]
    fn map_sizes_follow_padding() {
        let a = noise(16, 13, 1, 2);
        let b = noise(16, 13, 1, 3);
        assert_eq!(ssim(&a, &b, &SsimParams::evaluation()).unwrap().map.dims(), (6, 3));
        assert_eq!(ssim(&a, &b, &SsimParams::photometric()).unwrap().map.dims(), (16, 13));
    }

    #[test]
    fn constant_images_match_closed_form() {
        let p = SsimParams::evaluation();
        let (c1, c2) = (0.2, 0.7);
        let a = Image::from_fn(12, 12, 3, |_, _, _| c1);
        let b = Image::from_fn(12, 12, 3, |_, _, _| c2);
        let expected = (2.0 * c1 * c2 + p.c1) * p.c2 / ((c1 * c1 + c2 * c2 + p.c1) * p.c2);
        let got = ssim(&a, &b, &p).unwrap().mean;
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn symmetric_in_arguments() {
        let a = noise(14, 14, 3, 4);
        let b = noise(14, 14, 3, 5);
        let p = SsimParams::evaluation();
        let ab = ssim(&a, &b, &p).unwrap().mean;
        let ba = ssim(&b, &a, &p).unwrap().mean;
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = noise(10, 10, 1, 6);
        assert!(matches!(
            ssim(&a, &a, &SsimParams::evaluation()),
            Err(Error::WindowTooLarge { .. })
        ));
        assert!(ssim(&a, &noise(10, 9, 1, 7), &SsimParams::photometric()).is_err());
        let mut p = SsimParams::photometric();
        p.window = 4;
        assert!(ssim(&a, &a, &p).is_err());
        p.window = 3;
        p.c2 = 0.0;
        assert!(ssim(&a, &a, &p).is_err());
        let tiny = noise(1, 1, 1, 8);
        assert!(ssim(&tiny, &tiny, &SsimParams::photometric()).is_err());
    }

    #[test]
    fn reflection_indices() {
        assert_eq!(reflect(-1, 5), 1);
        assert_eq!(reflect(-2, 5), 2);
        assert_eq!(reflect(5, 5), 3);
        assert_eq!(reflect(6, 5), 2);
        assert_eq!(reflect(2, 5), 2);
    }

    #[test]
    fn gaussian_kernel_is_normalised() {
        let k = SsimParams::evaluation().kernel();
        assert_eq!(k.len(), 121);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(k[60] > k[0]);
    }
}
