use nalgebra::Vector3;

use crate::error::{check_dims, Error, Result};
use crate::geometry::{CameraIntrinsics, PointCloud};
use crate::image::DepthMap;

/// Per-pixel unit surface normals in the source camera frame.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalMap {
    width: usize,
    height: usize,
    normals: Vec<Vector3<f64>>,
    valid: Vec<bool>,
}

impl NormalMap {
    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            normals: vec![Vector3::zeros(); width * height],
            valid: vec![false; width * height],
        }
    }

    /// Stores `n` normalised; zero or non-finite vectors leave the pixel invalid.
    pub fn set(&mut self, u: usize, v: usize, n: Vector3<f64>) {
        let i = v * self.width + u;
        let len = n.norm();
        if len > 0.0 && len.is_finite() {
            self.normals[i] = n / len;
            self.valid[i] = true;
        } else {
            self.normals[i] = Vector3::zeros();
            self.valid[i] = false;
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

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Option<Vector3<f64>> {
        let i = v * self.width + u;
        self.valid[i].then(|| self.normals[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&b| b).count()
    }
}

/// Normals from depth gradients: the pixel and its `+u` / `+v` neighbours
/// are back-projected and the normal is the normalised cross product of the
/// two tangents, oriented towards the camera. The last column / row use the
/// `-u` / `-v` neighbour instead. A pixel is invalid when its own depth or a
/// neighbour it needs is invalid.
pub fn estimate_normals(depth: &DepthMap, k: &CameraIntrinsics) -> Result<NormalMap> {
    check_dims("depth map", k.dims(), depth.dims())?;
    let (w, h) = depth.dims();
    let point = |u: usize, v: usize| k.backproject_pixel(u as f64, v as f64, depth.get(u, v));
    let mut map = NormalMap::invalid(w, h);
    for v in 0..h {
        for u in 0..w {
            if !depth.is_valid(u, v) {
                continue;
            }
            let (ua, ub) = if u + 1 < w {
                (u, u + 1)
            } else if u > 0 {
                (u - 1, u)
            } else {
                continue;
            };
            let (va, vb) = if v + 1 < h {
                (v, v + 1)
            } else if v > 0 {
                (v - 1, v)
            } else {
                continue;
            };
            if !(depth.is_valid(ua, v) && depth.is_valid(ub, v) && depth.is_valid(u, va) && depth.is_valid(u, vb)) {
                continue;
            }
            let du = point(ub, v) - point(ua, v);
            let dv = point(u, vb) - point(u, va);
            // image axes (right, down) make dv × du point back at the camera
            map.set(u, v, dv.cross(&du));
        }
    }
    Ok(map)
}

/// Copies each point's normal from `normals` via the point's source pixel.
/// Pixels without a valid normal give a zero ("unknown") normal.
pub fn attach_normals(cloud: &PointCloud, normals: &NormalMap) -> Result<PointCloud> {
    let origins = cloud
        .origins
        .as_ref()
        .ok_or_else(|| Error::invalid("attaching normals needs per-point source pixels"))?;
    let mut out = cloud.clone();
    let mut attached = Vec::with_capacity(cloud.len());
    for o in origins {
        let (u, v) = (o.u as usize, o.v as usize);
        if u >= normals.width() || v >= normals.height() {
            return Err(Error::invalid(format!(
                "source pixel ({u}, {v}) lies outside the {}x{} normal map",
                normals.width(),
                normals.height()
            )));
        }
        attached.push(normals.get(u, v).unwrap_or_else(Vector3::zeros));
    }
    out.normals = Some(attached);
    Ok(out)
}
