use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ColorType, ExtendedColorType, ImageEncoder, ImageFormat};

use super::{read_file, write_atomic};
use crate::error::{Error, Result};
use crate::image::RgbImage;

/// Loads an 8-bit PNG as RGB in `[0, 1]`. Alpha is dropped, grey is
/// replicated; 16-bit and float images are rejected.
pub fn load_image(path: &Path) -> Result<RgbImage> {
    let bytes = read_file(path)?;
    let codec = |source| Error::Codec {
        path: path.to_path_buf(),
        source,
    };
    let decoded = image::load_from_memory_with_format(&bytes, ImageFormat::Png).map_err(codec)?;
    let rgb = match decoded.color() {
        ColorType::Rgb8 | ColorType::Rgba8 | ColorType::L8 | ColorType::La8 => decoded.into_rgb8(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("{other:?} PNG; only 8-bit RGB, RGBA or grey images are supported"),
            })
        }
    };
    let (w, h) = rgb.dimensions();
    let data = rgb.into_raw().into_iter().map(|b| b as f32 / 255.0).collect();
    RgbImage::from_vec(w as usize, h as usize, 3, data)
}

/// `floor(v * 255 + 0.5)` clamped to `0..=255`; NaN maps to 0.
pub fn to_u8(v: f32) -> u8 {
    let scaled = (v as f64 * 255.0 + 0.5).floor();
    if scaled.is_nan() {
        0
    } else {
        scaled.clamp(0.0, 255.0) as u8
    }
}

/// PNG bytes of an RGB image (channels beyond the third are ignored).
pub fn encode_png(image: &RgbImage) -> Result<Vec<u8>> {
    if image.channels() < 3 {
        return Err(Error::invalid(format!(
            "cannot encode a {}-channel image as RGB",
            image.channels()
        )));
    }
    let (w, h) = image.dims();
    let mut raw = Vec::with_capacity(w * h * 3);
    for px in image.data().chunks_exact(image.channels()) {
        raw.extend(px[..3].iter().map(|&c| to_u8(c)));
    }
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(&raw, w as u32, h as u32, ExtendedColorType::Rgb8)
        .map_err(|source| Error::Codec {
            path: "<memory>".into(),
            source,
        })?;
    Ok(out)
}

pub fn save_image(image: &RgbImage, path: &Path) -> Result<()> {
    write_atomic(path, &encode_png(image)?)
}
