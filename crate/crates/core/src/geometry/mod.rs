//! Camera model, rigid transforms, point clouds and the depth-induced flow
//! field between two views.

mod camera;
mod cloud;
mod flow;
mod transform;

pub use camera::CameraIntrinsics;
pub use cloud::{backproject, project, transform_cloud, PointCloud, PointOrigin, ProjectedPoint, Projection};
pub use flow::{flow_field, FlowField};
pub use transform::{pose_from_orbit, relative_pose, OrbitPose, RigidTransform};
