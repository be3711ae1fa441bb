use super::normals::{attach_normals, NormalMap};
use crate::error::{check_dims, Error, Result};
use crate::geometry::{CameraIntrinsics, PointCloud, RigidTransform};
use crate::image::{DepthMap, Mask};

/// Per-point back-face test: true when the transformed normal `R n` points
/// away from the target camera, i.e. `(R n) · (R p + t) / |R p + t| > epsilon`.
/// Points without a known normal are never culled.
pub fn backface_flags(cloud: &PointCloud, theta: &RigidTransform, epsilon: f64) -> Result<Vec<bool>> {
    let normals = cloud
        .normals
        .as_ref()
        .ok_or_else(|| Error::invalid("occlusion removal needs per-point normals"))?;
    Ok(cloud
        .points
        .iter()
        .zip(normals)
        .map(|(p, n)| {
            if *n == nalgebra::Vector3::zeros() {
                return false;
            }
            let q = theta.apply(p).coords;
            let len = q.norm();
            len > 0.0 && theta.apply_vector(n).dot(&q) / len > epsilon
        })
        .collect())
}

/// Removes points whose normals face away from the target viewpoint. Normals
/// are looked up per point from `normals` through the point's source pixel.
pub fn backface_cull(
    cloud: &PointCloud,
    normals: &NormalMap,
    theta: &RigidTransform,
    epsilon: f64,
) -> Result<PointCloud> {
    let with_normals = attach_normals(cloud, normals)?;
    cull_oriented(&with_normals, theta, epsilon)
}

/// Like [`backface_cull`] for a cloud that already carries normals.
pub fn cull_oriented(cloud: &PointCloud, theta: &RigidTransform, epsilon: f64) -> Result<PointCloud> {
    let flags = backface_flags(cloud, theta, epsilon)?;
    Ok(cloud.retain_indices(|i| !flags[i]))
}

/// Source pixels that occlusion removal would discard for `theta`.
pub fn backface_mask(
    depth: &DepthMap,
    k: &CameraIntrinsics,
    normals: &NormalMap,
    theta: &RigidTransform,
    epsilon: f64,
) -> Result<Mask> {
    check_dims("depth map", k.dims(), depth.dims())?;
    check_dims("normal map", k.dims(), normals.dims())?;
    let mut mask = Mask::new(k.width, k.height);
    for v in 0..k.height {
        for u in 0..k.width {
            let d = depth.get(u, v);
            let (Some(n), true) = (normals.get(u, v), d > 0.0) else {
                continue;
            };
            let q = theta.apply(&k.backproject_pixel(u as f64, v as f64, d)).coords;
            let len = q.norm();
            if len > 0.0 && theta.apply_vector(&n).dot(&q) / len > epsilon {
                mask.set(u, v, true);
            }
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::backproject;
    use crate::image::RgbImage;
    use crate::warping::estimate_normals;
    use nalgebra::Vector3;
    use std::f64::consts::PI;

    fn plane() -> (DepthMap, CameraIntrinsics, RgbImage) {
        let k = CameraIntrinsics::new(10.0, 10.0, 3.0, 3.0, 7, 7).unwrap();
        (DepthMap::from_fn(7, 7, |_, _| 2.0).unwrap(), k, RgbImage::black(7, 7))
    }

    #[test]
    fn identity_keeps_everything() {
        let (d, k, img) = plane();
        let n = estimate_normals(&d, &k).unwrap();
        let cloud = backproject(&d, &k, &img).unwrap();
        let kept = backface_cull(&cloud, &n, &RigidTransform::identity(), 0.0).unwrap();
        assert_eq!(kept.len(), cloud.len());
        assert_eq!(
            backface_mask(&d, &k, &n, &RigidTransform::identity(), 0.0)
                .unwrap()
                .count(),
            0
        );
    }

    #[test]
    fn half_turn_about_the_surface_removes_it() {
        let (d, k, img) = plane();
        let n = estimate_normals(&d, &k).unwrap();
        let cloud = backproject(&d, &k, &img).unwrap();
        // orbit to the far side: rotate 180° about the vertical axis through (0,0,2)
        let theta = RigidTransform::from_axis_angle(Vector3::y(), PI, Vector3::new(0.0, 0.0, 4.0));
        let kept = backface_cull(&cloud, &n, &theta, 0.0).unwrap();
        assert!(kept.is_empty());
        assert_eq!(backface_mask(&d, &k, &n, &theta, 0.0).unwrap().count(), 49);
    }

    #[test]
    fn unknown_normals_are_kept_and_missing_normals_error() {
        let (d, k, img) = plane();
        let cloud = backproject(&d, &k, &img).unwrap();
        assert!(cull_oriented(&cloud, &RigidTransform::identity(), 0.0).is_err());
        let mut oriented = cloud.clone();
        oriented.normals = Some(vec![Vector3::zeros(); cloud.len()]);
        let theta = RigidTransform::from_axis_angle(Vector3::y(), PI, Vector3::new(0.0, 0.0, 4.0));
        assert_eq!(cull_oriented(&oriented, &theta, 0.0).unwrap().len(), cloud.len());
    }

    #[test]
    fn epsilon_keeps_grazing_surfaces() {
        let (d, k, img) = plane();
        let n = estimate_normals(&d, &k).unwrap();
        let cloud = backproject(&d, &k, &img).unwrap();
        let theta = RigidTransform::from_axis_angle(Vector3::y(), PI, Vector3::new(0.0, 0.0, 4.0));
        assert!(backface_cull(&cloud, &n, &theta, 1.5).unwrap().len() == cloud.len());
    }
}
