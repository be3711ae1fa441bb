use super::bilinear::{bilinear_sample_into, footprint_overlaps};
use crate::error::{check_dims, Result};
use crate::geometry::{flow_field, CameraIntrinsics, RigidTransform};
use crate::image::{DepthMap, Mask, RgbImage};

/// Dense source-view reconstruction sampled from the target image.
#[derive(Clone, Debug, PartialEq)]
pub struct BackwardWarp {
    pub image: RgbImage,
    /// False where the source depth is invalid or the sample footprint lies
    /// entirely outside the target image.
    pub mask: Mask,
}

/// Backward warp: each valid source pixel takes the bilinearly interpolated
/// target colour at its flow-field position. Regions occluded in the target
/// still receive a value (whatever surface the target shows there).
pub fn backward_warp(
    target_image: &RgbImage,
    source_depth: &DepthMap,
    k: &CameraIntrinsics,
    theta: &RigidTransform,
) -> Result<BackwardWarp> {
    check_dims("target image", k.dims(), target_image.dims())?;
    let flow = flow_field(source_depth, k, theta)?;
    let (w, h) = k.dims();
    let mut image = RgbImage::new(w, h, target_image.channels());
    let mut mask = Mask::new(w, h);
    for v in 0..h {
        for u in 0..w {
            let Some((tu, tv, _)) = flow.get(u, v) else {
                continue;
            };
            if !footprint_overlaps(w, h, tu, tv) {
                continue;
            }
            bilinear_sample_into(target_image, tu, tv, image.pixel_mut(u, v));
            mask.set(u, v, true);
        }
    }
    Ok(BackwardWarp { image, mask })
}
