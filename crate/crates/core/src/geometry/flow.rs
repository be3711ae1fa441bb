use nalgebra::Vector3;

use super::camera::CameraIntrinsics;
use super::transform::RigidTransform;
use crate::error::{check_dims, Result};
use crate::image::DepthMap;

/// Dense source-to-target correspondence: for each source pixel, the
/// continuous target pixel coordinates and the depth in the target camera.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    coords: Vec<[f64; 2]>,
    depth: Vec<f64>,
    valid: Vec<bool>,
}

impl FlowField {
    pub fn invalid(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            coords: vec![[0.0; 2]; n],
            depth: vec![0.0; n],
            valid: vec![false; n],
        }
    }

    /// Sets pixel `(u, v)` to map to `(tu, tv)` at target depth `z`; the
    /// entry is marked invalid unless `z > 0` and everything is finite.
    pub fn set(&mut self, u: usize, v: usize, tu: f64, tv: f64, z: f64) {
        let i = v * self.width + u;
        let ok = z > 0.0 && z.is_finite() && tu.is_finite() && tv.is_finite();
        self.valid[i] = ok;
        if ok {
            self.coords[i] = [tu, tv];
            self.depth[i] = z;
        } else {
            self.coords[i] = [0.0; 2];
            self.depth[i] = 0.0;
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Target coordinates and depth at source pixel `(u, v)`, if valid.
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Option<(f64, f64, f64)> {
        let i = v * self.width + u;
        self.valid[i].then(|| (self.coords[i][0], self.coords[i][1], self.depth[i]))
    }

    #[inline]
    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        self.valid[v * self.width + u]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&b| b).count()
    }

    /// Largest coordinate difference over pixels valid in both fields, and
    /// the number of pixels whose validity differs.
    pub fn compare(&self, other: &FlowField) -> (f64, usize) {
        let mut max = 0.0f64;
        let mut mismatched = 0;
        for i in 0..self.valid.len() {
            match (self.valid[i], other.valid[i]) {
                (true, true) => {
                    let du = (self.coords[i][0] - other.coords[i][0]).abs();
                    let dv = (self.coords[i][1] - other.coords[i][1]).abs();
                    max = max.max(du).max(dv);
                }
                (false, false) => {}
                _ => mismatched += 1,
            }
        }
        (max, mismatched)
    }
}

/// Per-pixel flow `K θ K⁻¹ D(p) p`, evaluated as `A (D p) + b` with
/// `A = K R K⁻¹` and `b = K t`; the homogeneous result `[x, y, z]` gives
/// target pixel `(x / z, y / z)` and target depth `z`.
pub fn flow_field(depth: &DepthMap, k: &CameraIntrinsics, theta: &RigidTransform) -> Result<FlowField> {
    check_dims("depth map", k.dims(), depth.dims())?;
    let km = k.matrix();
    let a = km * theta.rotation() * k.inverse_matrix();
    let b = km * theta.translation();
    let mut flow = FlowField::invalid(depth.width(), depth.height());
    if theta.is_identity() {
        // K K⁻¹ is not bit-exact in floating point; the identity map is.
        for v in 0..depth.height() {
            for u in 0..depth.width() {
                flow.set(u, v, u as f64, v as f64, depth.get(u, v));
            }
        }
        return Ok(flow);
    }
    for v in 0..depth.height() {
        for u in 0..depth.width() {
            let d = depth.get(u, v);
            if d <= 0.0 {
                continue;
            }
            let h = a * Vector3::new(u as f64 * d, v as f64 * d, d) + b;
            if h.z > 0.0 {
                flow.set(u, v, h.x / h.z, h.y / h.z, h.z);
            }
        }
    }
    Ok(flow)
}
