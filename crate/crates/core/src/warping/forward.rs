use crate::error::Result;
use crate::geometry::{backproject, transform_cloud, CameraIntrinsics, PointCloud, RigidTransform};
use crate::image::{DepthMap, Mask, RgbImage};

/// Sparse target-view image produced by splatting a point cloud.
///
/// `rgb` is zero wherever `coverage` is false, and `zbuffer` holds the
/// nearest target depth exactly where `coverage` is true (0 elsewhere).
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseView {
    pub rgb: RgbImage,
    pub coverage: Mask,
    pub zbuffer: Vec<f64>,
}

impl CoarseView {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            rgb: RgbImage::black(width, height),
            coverage: Mask::new(width, height),
            zbuffer: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.rgb.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.rgb.height()
    }

    #[inline]
    pub fn depth_at(&self, u: usize, v: usize) -> f64 {
        self.zbuffer[v * self.width() + u]
    }

    pub fn covered(&self) -> usize {
        self.coverage.count()
    }

    /// Fraction of pixels covered.
    pub fn coverage_ratio(&self) -> f64 {
        self.covered() as f64 / (self.width() * self.height()) as f64
    }

    /// Coverage mask rendered as a white-on-black image.
    pub fn coverage_image(&self) -> RgbImage {
        RgbImage::from_fn(self.width(), self.height(), 3, |u, v, _| {
            if self.coverage.get(u, v) {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// Z-buffered nearest-pixel splat of a cloud already expressed in the target
/// camera frame. Each point lands on `round(u'), round(v')`; points behind
/// the camera or outside the image are dropped. A point replaces the stored
/// one only if it is strictly nearer, so at equal depth the earlier point
/// (row-major source order for back-projected clouds) wins.
pub fn splat(cloud: &PointCloud, k: &CameraIntrinsics) -> CoarseView {
    let mut view = CoarseView::empty(k.width, k.height);
    for (p, &color) in cloud.points.iter().zip(&cloud.colors) {
        let Some((u, v)) = k.project_point(p) else {
            continue;
        };
        let Some((pu, pv)) = k.pixel_at(u, v) else {
            continue;
        };
        let i = pv * k.width + pu;
        if !view.coverage.get(pu, pv) || p.z < view.zbuffer[i] {
            view.coverage.set(pu, pv, true);
            view.zbuffer[i] = p.z;
            view.rgb.put_rgb(pu, pv, color);
        }
    }
    view
}

/// Forward warp: every valid source pixel is moved to its flow-field
/// position in the target view; collisions keep the nearest surface.
pub fn forward_warp(
    image: &RgbImage,
    depth: &DepthMap,
    k: &CameraIntrinsics,
    theta: &RigidTransform,
) -> Result<CoarseView> {
    let cloud = backproject(depth, k, image)?;
    Ok(splat(&transform_cloud(&cloud, theta), k))
}
