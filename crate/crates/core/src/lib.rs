//! Point-cloud based view synthesis geometry.
//!
//! A source image with per-pixel depth is lifted to a coloured point cloud,
//! moved by a rigid transform and re-projected into a target camera. This
//! crate provides that pipeline (forward and backward warping, occlusion
//! removal, symmetry completion and multi-view fusion), the photometric and
//! completion losses used to train such systems, evaluation metrics, an
//! analytic ray-traced scene oracle for exact ground truth, and the file
//! formats used by the `pointwarp` command-line tool.

pub mod error;
pub mod geometry;
pub mod image;
pub mod io;
pub mod losses;
pub mod multiview;
pub mod oracle;
pub mod warping;

pub use error::{Error, Result};
pub use geometry::{
    backproject, flow_field, pose_from_orbit, project, relative_pose, transform_cloud, CameraIntrinsics, FlowField,
    OrbitPose, PointCloud, PointOrigin, RigidTransform,
};
pub use image::{DepthMap, Image, Mask, RgbImage};
