use nalgebra::{Point2, Point3, Vector3};
use rayon::prelude::*;

use super::scene::{Primitive, SceneSpec, Shape};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, FlowField, RigidTransform};
use crate::image::{DepthMap, RgbImage};
use crate::warping::NormalMap;

/// Nearest ray–primitive intersection at one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    /// Camera-space depth `Z` of the hit.
    pub depth: f64,
    pub world_point: Point3<f64>,
    /// Unit normal in world coordinates, facing the incoming ray.
    pub world_normal: Vector3<f64>,
    pub primitive: usize,
    /// Box face index `2 * axis + (positive side as usize)`; 0 otherwise.
    pub face: usize,
    pub color: [f32; 3],
}

/// Output of [`render`].
#[derive(Clone, Debug, PartialEq)]
pub struct Rendering {
    pub image: RgbImage,
    pub depth: DepthMap,
    /// Camera-space normals facing the camera.
    pub normals: NormalMap,
}

const T_MIN: f64 = 1e-9;

struct LocalHit {
    t: f64,
    point: Point3<f64>,
    normal: Vector3<f64>,
    face: usize,
}

fn intersect_local(shape: &Shape, o: &Point3<f64>, d: &Vector3<f64>) -> Option<LocalHit> {
    match *shape {
        Shape::Plane { size } => {
            if d.z == 0.0 {
                return None;
            }
            let t = -o.z / d.z;
            if t <= T_MIN {
                return None;
            }
            let mut p = o + d * t;
            p.z = 0.0;
            if p.x.abs() > size[0] / 2.0 || p.y.abs() > size[1] / 2.0 {
                return None;
            }
            let normal = if d.z > 0.0 { -Vector3::z() } else { Vector3::z() };
            Some(LocalHit {
                t,
                point: p,
                normal,
                face: 0,
            })
        }
        Shape::Cube { size } => {
            let half = size.half();
            let (mut t_near, mut t_far) = (f64::NEG_INFINITY, f64::INFINITY);
            let mut near_axis = 0;
            for axis in 0..3 {
                if d[axis] == 0.0 {
                    if o[axis].abs() > half[axis] {
                        return None;
                    }
                    continue;
                }
                let t1 = (-half[axis] - o[axis]) / d[axis];
                let t2 = (half[axis] - o[axis]) / d[axis];
                let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                if lo > t_near {
                    t_near = lo;
                    near_axis = axis;
                }
                t_far = t_far.min(hi);
            }
            // camera inside the box sees nothing of it
            if t_near > t_far || t_near <= T_MIN {
                return None;
            }
            let positive = d[near_axis] < 0.0;
            let mut point = o + d * t_near;
            point[near_axis] = if positive { half[near_axis] } else { -half[near_axis] };
            let mut normal = Vector3::zeros();
            normal[near_axis] = if positive { 1.0 } else { -1.0 };
            Some(LocalHit {
                t: t_near,
                point,
                normal,
                face: 2 * near_axis + positive as usize,
            })
        }
        Shape::Sphere { radius } => {
            let a = d.norm_squared();
            let b = o.coords.dot(d);
            let c = o.coords.norm_squared() - radius * radius;
            let disc = b * b - a * c;
            if disc < 0.0 {
                return None;
            }
            let t = (-b - disc.sqrt()) / a;
            if t <= T_MIN {
                return None;
            }
            let point = o + d * t;
            Some(LocalHit {
                t,
                point,
                normal: point.coords / radius,
                face: 0,
            })
        }
    }
}

fn shade(prim: &Primitive, hit: &LocalHit) -> [f32; 3] {
    let mut p = hit.point;
    if prim.symmetric {
        p.x = p.x.abs();
    }
    match prim.shape {
        Shape::Plane { .. } => prim.texture.color2(Point2::new(p.x, p.y)),
        Shape::Cube { .. } => {
            let uv = match hit.face / 2 {
                0 => Point2::new(p.y, p.z),
                1 => Point2::new(p.x, p.z),
                _ => Point2::new(p.x, p.y),
            };
            prim.texture.color2(uv)
        }
        Shape::Sphere { .. } => prim.texture.color3(p),
    }
}

/// Nearest hit along the world-space ray `origin + t * dir`; with `dir`
/// built from a `z = 1` camera ray, `t` equals the camera-space depth.
pub fn trace_ray(scene: &SceneSpec, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for (index, prim) in scene.primitives.iter().enumerate() {
        let to_local = prim.pose.inverse();
        let o = to_local.apply(origin);
        let d = to_local.apply_vector(dir);
        let Some(h) = intersect_local(&prim.shape, &o, &d) else {
            continue;
        };
        if best.as_ref().is_some_and(|b| b.depth <= h.t) {
            continue;
        }
        best = Some(Hit {
            depth: h.t,
            world_point: origin + dir * h.t,
            world_normal: prim.pose.apply_vector(&h.normal),
            primitive: index,
            face: h.face,
            color: shade(prim, &h),
        });
    }
    best
}

/// Traces one ray per pixel centre for a camera with world-to-camera
/// extrinsic `pose`. Row-major, `None` for background.
pub fn trace(scene: &SceneSpec, k: &CameraIntrinsics, pose: &RigidTransform) -> Vec<Option<Hit>> {
    let cam_to_world = pose.inverse();
    let origin = Point3::from(*cam_to_world.translation());
    (0..k.height)
        .into_par_iter()
        .flat_map_iter(|v| {
            let cam_to_world = &cam_to_world;
            (0..k.width).map(move |u| {
                let dir = cam_to_world.apply_vector(&k.ray(u as f64, v as f64));
                trace_ray(scene, &origin, &dir)
            })
        })
        .collect()
}

/// Ray-traced image, exact depth and analytic normals. Background pixels are
/// black with depth 0.
pub fn render(scene: &SceneSpec, k: &CameraIntrinsics, pose: &RigidTransform) -> Result<Rendering> {
    let hits = trace(scene, k, pose);
    let mut image = RgbImage::black(k.width, k.height);
    let mut depth = Vec::with_capacity(hits.len());
    let mut normals = NormalMap::invalid(k.width, k.height);
    for (i, hit) in hits.iter().enumerate() {
        let (u, v) = (i % k.width, i / k.width);
        match hit {
            Some(h) => {
                image.put_rgb(u, v, h.color);
                depth.push(h.depth);
                normals.set(u, v, pose.apply_vector(&h.world_normal));
            }
            None => depth.push(0.0),
        }
    }
    let depth = DepthMap::from_vec(k.width, k.height, depth)
        .map_err(|e| Error::invalid(format!("renderer produced an invalid depth map: {e}")))?;
    Ok(Rendering { image, depth, normals })
}

/// Exact correspondence field from the source camera to the target camera:
/// each source ray is intersected with the scene and the world-space hit
/// point is projected through the target extrinsic. No visibility test is
/// made in the target.
pub fn analytic_flow(
    scene: &SceneSpec,
    k: &CameraIntrinsics,
    pose_s: &RigidTransform,
    pose_t: &RigidTransform,
) -> FlowField {
    let hits = trace(scene, k, pose_s);
    let mut flow = FlowField::invalid(k.width, k.height);
    let r = pose_t.rotation();
    let t = pose_t.translation();
    for (i, hit) in hits.iter().enumerate() {
        let Some(h) = hit else { continue };
        let x = r * h.world_point.coords + t;
        flow.set(
            i % k.width,
            i / k.width,
            k.fx * (x.x / x.z) + k.cx,
            k.fy * (x.y / x.z) + k.cy,
            x.z,
        );
    }
    flow
}
