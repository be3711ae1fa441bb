//! Shared fixtures for the criterion benchmarks.

use pointwarp::oracle::{render, scenes, Rendering};
use pointwarp::{pose_from_orbit, relative_pose, CameraIntrinsics, OrbitPose, RigidTransform};

/// Square camera with a 60° horizontal field of view.
pub fn camera(size: usize) -> CameraIntrinsics {
    let focal = size as f64 / 2.0 / (30f64).to_radians().tan();
    CameraIntrinsics::centered(focal, size, size).expect("valid camera")
}

pub fn orbit(azimuth: f64) -> RigidTransform {
    pose_from_orbit(&OrbitPose::new(azimuth, 20.0, 3.0).expect("valid orbit")).expect("non-degenerate")
}

/// Oracle render of the textured unit cube and the relative pose to a view
/// 20° further round the orbit.
pub fn cube_fixture(size: usize) -> (Rendering, CameraIntrinsics, RigidTransform) {
    let k = camera(size);
    let scene = scenes::cube(1.0, scenes::warm_checker(0.25));
    let source = orbit(30.0);
    let rendering = render(&scene, &k, &source).expect("render");
    (rendering, k, relative_pose(&source, &orbit(50.0)))
}
