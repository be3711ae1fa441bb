//! Dense raster containers shared by every module.
//!
//! Images are interleaved, row-major, with `(0, 0)` at the top-left corner.
//! Colour images are stored as `f32` in `[0, 1]`; the loss functions work on
//! `f64` copies so their gradients can be checked numerically.

use crate::error::{Error, Result};

/// Interleaved multi-channel raster.
#[derive(Clone, Debug, PartialEq)]
pub struct Image<T = f32> {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<T>,
}

/// Three-channel colour image with values in `[0, 1]`.
pub type RgbImage = Image<f32>;

impl<T: Copy + Default> Image<T> {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![T::default(); width * height * channels],
        }
    }

    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::invalid("image must have at least one channel"));
        }
        if data.len() != width * height * channels {
            return Err(Error::invalid(format!(
                "buffer of {} values cannot hold a {width}x{height}x{channels} image",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, channels: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height * channels);
        for v in 0..height {
            for u in 0..width {
                for c in 0..channels {
                    data.push(f(u, v, c));
                }
            }
        }
        Self {
            width,
            height,
            channels,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    fn offset(&self, u: usize, v: usize) -> usize {
        debug_assert!(u < self.width && v < self.height);
        (v * self.width + u) * self.channels
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize, c: usize) -> T {
        self.data[self.offset(u, v) + c]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, c: usize, value: T) {
        let i = self.offset(u, v) + c;
        self.data[i] = value;
    }

    #[inline]
    pub fn pixel(&self, u: usize, v: usize) -> &[T] {
        let i = self.offset(u, v);
        &self.data[i..i + self.channels]
    }

    #[inline]
    pub fn pixel_mut(&mut self, u: usize, v: usize) -> &mut [T] {
        let i = self.offset(u, v);
        let c = self.channels;
        &mut self.data[i..i + c]
    }

    pub fn same_shape<U>(&self, other: &Image<U>) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }
}

impl RgbImage {
    /// Black three-channel image.
    pub fn black(width: usize, height: usize) -> Self {
        Self::new(width, height, 3)
    }

    #[inline]
    pub fn rgb(&self, u: usize, v: usize) -> [f32; 3] {
        let p = self.pixel(u, v);
        [p[0], p[1], p[2]]
    }

    #[inline]
    pub fn put_rgb(&mut self, u: usize, v: usize, rgb: [f32; 3]) {
        self.pixel_mut(u, v).copy_from_slice(&rgb);
    }

    pub fn to_f64(&self) -> Image<f64> {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&x| f64::from(x)).collect(),
        }
    }
}

impl Image<f64> {
    pub fn to_f32(&self) -> Image<f32> {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&x| x as f32).collect(),
        }
    }

    /// Same-size image holding the per-pixel mean over channels.
    pub fn channel_mean(&self) -> Image<f64> {
        let c = self.channels as f64;
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data: self
                .data
                .chunks_exact(self.channels)
                .map(|p| p.iter().sum::<f64>() / c)
                .collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Per-pixel scene depth. `0.0` marks background / invalid pixels; every
/// other value is finite and strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DepthMap {
    /// All-background depth map.
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::invalid(format!(
                "{} depth values cannot fill a {width}x{height} map",
                values.len()
            )));
        }
        if let Some((i, d)) = values
            .iter()
            .enumerate()
            .find(|(_, d)| !(**d == 0.0 || (d.is_finite() && **d > 0.0)))
        {
            return Err(Error::invalid(format!(
                "depth at pixel ({}, {}) is {d}; expected 0 or a finite positive value",
                i % width.max(1),
                i / width.max(1)
            )));
        }
        Ok(Self { width, height, values })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                values.push(f(u, v));
            }
        }
        Self::from_vec(width, height, values)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[v * self.width + u]
    }

    #[inline]
    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        self.get(u, v) > 0.0
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().filter(|&&d| d > 0.0).count()
    }

    /// Mean over valid pixels, `None` when no pixel is valid.
    pub fn valid_mean(&self) -> Option<f64> {
        let (sum, n) = self
            .values
            .iter()
            .filter(|&&d| d > 0.0)
            .fold((0.0, 0usize), |(s, n), &d| (s + d, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

/// Row-major boolean raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::invalid("mask length does not match its dimensions"));
        }
        Ok(Self { width, height, bits })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[v * self.width + u]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: bool) {
        self.bits[v * self.width + u] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.bits.len() == other.bits.len() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}
