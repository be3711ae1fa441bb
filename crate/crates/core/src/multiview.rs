//! Multi-view fusion: per-view clouds moved into one reference camera frame,
//! coarse views rendered from the fused cloud, and 360° reconstruction.

use std::num::NonZero;

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use rayon::prelude::*;

use crate::error::{check_dims, Error, Result};
use crate::geometry::{backproject, transform_cloud, CameraIntrinsics, PointCloud, RigidTransform};
use crate::image::{DepthMap, RgbImage};
use crate::warping::{attach_normals, estimate_normals, render_cloud, CoarseOptions, CoarseView};

/// One posed RGB-D observation.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewRecord {
    pub image: RgbImage,
    pub depth: DepthMap,
    pub intrinsics: CameraIntrinsics,
    /// Camera-to-world pose.
    pub camera_to_world: RigidTransform,
}

impl ViewRecord {
    pub fn new(
        image: RgbImage,
        depth: DepthMap,
        intrinsics: CameraIntrinsics,
        camera_to_world: RigidTransform,
    ) -> Result<Self> {
        check_dims("view image", intrinsics.dims(), image.dims())?;
        check_dims("view depth", intrinsics.dims(), depth.dims())?;
        Ok(Self {
            image,
            depth,
            intrinsics,
            camera_to_world,
        })
    }

    /// World-to-camera extrinsic.
    pub fn extrinsic(&self) -> RigidTransform {
        self.camera_to_world.inverse()
    }

    fn oriented_cloud(&self, index: usize) -> Result<PointCloud> {
        let cloud = backproject(&self.depth, &self.intrinsics, &self.image)?;
        let mut cloud = attach_normals(&cloud, &estimate_normals(&self.depth, &self.intrinsics)?)?;
        for o in cloud.origins.iter_mut().flatten() {
            o.view = index as u32;
        }
        Ok(cloud)
    }
}

/// Back-projects every view, expresses the points in the camera frame of
/// `views[reference]` and concatenates them in input order. Each point keeps
/// its source view and pixel, and carries the normal estimated in its own
/// view.
pub fn fuse_clouds(views: &[ViewRecord], reference: usize) -> Result<PointCloud> {
    if views.is_empty() {
        return Err(Error::invalid("fusion needs at least one view"));
    }
    let reference_pose = views
        .get(reference)
        .ok_or_else(|| Error::invalid(format!("reference view {reference} out of range")))?
        .extrinsic();
    let parts: Vec<PointCloud> = views
        .par_iter()
        .enumerate()
        .map(|(i, view)| {
            let cloud = view.oriented_cloud(i)?;
            Ok(transform_cloud(&cloud, &reference_pose.compose(&view.camera_to_world)))
        })
        .collect::<Result<_>>()?;
    let mut fused = PointCloud {
        origins: Some(Vec::new()),
        normals: Some(Vec::new()),
        ..PointCloud::default()
    };
    for part in parts {
        fused.extend(part);
    }
    Ok(fused)
}

/// Coarse target view of a fused cloud; `target_pose` maps reference-camera
/// coordinates to target-camera coordinates.
pub fn coarse_from_fused(
    cloud: &PointCloud,
    k: &CameraIntrinsics,
    target_pose: &RigidTransform,
    opts: &CoarseOptions,
) -> Result<CoarseView> {
    if cloud.is_empty() {
        return Ok(CoarseView::empty(k.width, k.height));
    }
    render_cloud(cloud, k, target_pose, opts)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructOptions {
    /// Drop points whose nearest-neighbour distance exceeds
    /// `mean + sigmas * std` of all nearest-neighbour distances.
    pub prune: bool,
    pub sigmas: f64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            prune: false,
            sigmas: 3.0,
        }
    }
}

/// Stitches all views into the first view's camera frame.
pub fn reconstruct_360(views: &[ViewRecord], opts: &ReconstructOptions) -> Result<PointCloud> {
    if views.len() < 2 {
        return Err(Error::invalid(format!(
            "360° reconstruction needs at least two views, got {}",
            views.len()
        )));
    }
    let cloud = fuse_clouds(views, 0)?;
    if opts.prune {
        Ok(prune_outliers(&cloud, opts.sigmas))
    } else {
        Ok(cloud)
    }
}

/// Distance from each point to its nearest other point (0 for duplicates).
pub fn nearest_neighbour_distances(cloud: &PointCloud) -> Vec<f64> {
    if cloud.len() < 2 {
        return vec![0.0; cloud.len()];
    }
    let coords: Vec<[f64; 3]> = cloud.points.iter().map(|p| [p.x, p.y, p.z]).collect();
    let tree: ImmutableKdTree<f64, 3> = ImmutableKdTree::new_from_slice(&coords);
    let two = NonZero::new(2).expect("non-zero");
    coords
        .par_iter()
        .map(|q| {
            let found = tree.nearest_n::<SquaredEuclidean>(q, two);
            found.get(1).map_or(0.0, |n| n.distance.sqrt())
        })
        .collect()
}

/// Statistical outlier removal on nearest-neighbour distance.
pub fn prune_outliers(cloud: &PointCloud, sigmas: f64) -> PointCloud {
    let dist = nearest_neighbour_distances(cloud);
    if dist.is_empty() {
        return cloud.clone();
    }
    let n = dist.len() as f64;
    let mean = dist.iter().sum::<f64>() / n;
    let std = (dist.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
    let limit = mean + sigmas * std;
    cloud.retain_indices(|i| dist[i] <= limit)
}
