use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, RigidTransform};

/// Default distance under which a mirrored point counts as a duplicate.
pub const DEFAULT_MERGE_RADIUS: f64 = 1e-6;

/// Plane `normal · x = offset` with a unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPlane", into = "RawPlane")]
pub struct SymmetryPlane {
    normal: Vector3<f64>,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPlane {
    normal: [f64; 3],
    #[serde(default)]
    offset: f64,
}

impl TryFrom<RawPlane> for SymmetryPlane {
    type Error = Error;

    fn try_from(r: RawPlane) -> Result<Self> {
        SymmetryPlane::new(Vector3::from(r.normal), r.offset)
    }
}

impl From<SymmetryPlane> for RawPlane {
    fn from(p: SymmetryPlane) -> Self {
        RawPlane {
            normal: p.normal.into(),
            offset: p.offset,
        }
    }
}

impl Default for SymmetryPlane {
    /// The `x = 0` plane.
    fn default() -> Self {
        Self {
            normal: Vector3::x(),
            offset: 0.0,
        }
    }
}

impl SymmetryPlane {
    pub fn new(normal: Vector3<f64>, offset: f64) -> Result<Self> {
        if !offset.is_finite() || ((normal.norm() - 1.0).abs() > 1e-6) {
            return Err(Error::invalid(format!(
                "symmetry plane needs a unit normal and finite offset, got |n| = {}, d = {offset}",
                normal.norm()
            )));
        }
        Ok(Self { normal, offset })
    }

    #[inline]
    pub fn normal(&self) -> &Vector3<f64> {
        &self.normal
    }

    #[inline]
    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    #[inline]
    pub fn reflect_point(&self, p: &Point3<f64>) -> Point3<f64> {
        p - self.normal * (2.0 * self.signed_distance(p))
    }

    #[inline]
    pub fn reflect_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        v - self.normal * (2.0 * self.normal.dot(v))
    }

    /// The same plane expressed in the frame reached by `frame`
    /// (`x' = R x + t`).
    pub fn transformed(&self, frame: &RigidTransform) -> SymmetryPlane {
        let normal = frame.apply_vector(&self.normal);
        SymmetryPlane {
            normal,
            offset: self.offset + normal.dot(frame.translation()),
        }
    }
}

/// Uniform hash grid answering "is any stored point within `radius`?".
struct MergeGrid {
    radius: f64,
    cells: HashMap<[i64; 3], Vec<Point3<f64>>>,
}

impl MergeGrid {
    fn new(radius: f64) -> Self {
        Self {
            radius,
            cells: HashMap::new(),
        }
    }

    fn key(&self, p: &Point3<f64>) -> [i64; 3] {
        [
            (p.x / self.radius).floor() as i64,
            (p.y / self.radius).floor() as i64,
            (p.z / self.radius).floor() as i64,
        ]
    }

    fn insert(&mut self, p: Point3<f64>) {
        self.cells.entry(self.key(&p)).or_default().push(p);
    }

    fn has_neighbour(&self, p: &Point3<f64>) -> bool {
        let [x, y, z] = self.key(p);
        let r2 = self.radius * self.radius;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(pts) = self.cells.get(&[x + dx, y + dy, z + dz]) {
                        if pts.iter().any(|q| (q - p).norm_squared() <= r2) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Returns `cloud` followed by the mirror image of each point across
/// `plane` (colour, origin and normal copied, origin flagged as mirrored).
/// A mirrored point within `merge_radius` of a point already in the output
/// is dropped, so points on the plane are not doubled.
pub fn symmetrize(cloud: &PointCloud, plane: &SymmetryPlane, merge_radius: f64) -> Result<PointCloud> {
    if !(merge_radius.is_finite() && merge_radius > 0.0) {
        return Err(Error::invalid(format!(
            "merge radius must be positive, got {merge_radius}"
        )));
    }
    let mut grid = MergeGrid::new(merge_radius);
    for p in &cloud.points {
        grid.insert(*p);
    }
    let mut added = Vec::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let m = plane.reflect_point(p);
        if !grid.has_neighbour(&m) {
            grid.insert(m);
            added.push((i, m));
        }
    }

    let mut out = cloud.clone();
    out.points.extend(added.iter().map(|&(_, m)| m));
    out.colors.extend(added.iter().map(|&(i, _)| cloud.colors[i]));
    if let Some(origins) = out.origins.as_mut() {
        origins.extend(added.iter().map(|&(i, _)| {
            let mut o = cloud.origins.as_ref().expect("parallel")[i];
            o.mirrored = true;
            o
        }));
    }
    if let Some(normals) = out.normals.as_mut() {
        let src = cloud.normals.as_ref().expect("parallel");
        normals.extend(added.iter().map(|&(i, _)| plane.reflect_vector(&src[i])));
    }
    Ok(out)
}
