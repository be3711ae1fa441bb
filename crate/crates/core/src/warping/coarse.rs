use serde::{Deserialize, Serialize};

use super::cull::cull_oriented;
use super::forward::{splat, CoarseView};
use super::normals::{attach_normals, estimate_normals};
use super::symmetry::{symmetrize, SymmetryPlane, DEFAULT_MERGE_RADIUS};
use crate::error::Result;
use crate::geometry::{backproject, transform_cloud, CameraIntrinsics, PointCloud, RigidTransform};
use crate::image::{DepthMap, RgbImage};

/// Left-right symmetry prior for coarse-view construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Symmetry {
    /// Plane in the object-centred frame.
    #[serde(default)]
    pub plane: SymmetryPlane,
    /// Object frame to the frame of the cloud being completed (the source
    /// camera for [`coarse_view`], the reference camera for fused clouds).
    pub object_to_camera: RigidTransform,
    #[serde(default = "default_merge_radius")]
    pub merge_radius: f64,
}

fn default_merge_radius() -> f64 {
    DEFAULT_MERGE_RADIUS
}

impl Symmetry {
    pub fn new(plane: SymmetryPlane, object_to_camera: RigidTransform) -> Self {
        Self {
            plane,
            object_to_camera,
            merge_radius: DEFAULT_MERGE_RADIUS,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoarseOptions {
    /// Remove points whose normals face away from the target camera.
    #[serde(default)]
    pub cull: bool,
    /// Back-face threshold; `0` keeps exactly grazing surfaces.
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub symmetry: Option<Symmetry>,
}

/// Coarse target view from a single source image and depth map:
/// back-project, optionally mirror across the symmetry plane, optionally
/// drop back-facing points, then transform and z-buffer splat.
///
/// Mirroring runs before occlusion removal so that mirrored copies are
/// tested against the target viewpoint with their reflected normals. With
/// every option off the result is identical to [`super::forward_warp`].
pub fn coarse_view(
    image: &RgbImage,
    depth: &DepthMap,
    k: &CameraIntrinsics,
    theta: &RigidTransform,
    opts: &CoarseOptions,
) -> Result<CoarseView> {
    let mut cloud = backproject(depth, k, image)?;
    if opts.cull {
        cloud = attach_normals(&cloud, &estimate_normals(depth, k)?)?;
    }
    render_cloud(&cloud, k, theta, opts)
}

/// Coarse view of an existing cloud. The cloud must carry normals when
/// culling is requested.
pub fn render_cloud(
    cloud: &PointCloud,
    k: &CameraIntrinsics,
    theta: &RigidTransform,
    opts: &CoarseOptions,
) -> Result<CoarseView> {
    let mut working;
    let mut current = cloud;
    if let Some(sym) = &opts.symmetry {
        let plane = sym.plane.transformed(&sym.object_to_camera);
        working = symmetrize(current, &plane, sym.merge_radius)?;
        current = &working;
    }
    if opts.cull {
        working = cull_oriented(current, theta, opts.epsilon)?;
        current = &working;
    }
    Ok(splat(&transform_cloud(current, theta), k))
}
