//! Rigid transforms and the orbit pose convention.
//!
//! Camera frame: right-handed, `+X` right, `+Y` down, `+Z` into the scene.
//! World frame for orbit poses: right-handed with `+Y` up. A camera at
//! azimuth 0 and elevation 0 sits on the `-Z` axis looking at the origin;
//! increasing azimuth moves it towards `+X`, increasing elevation raises it
//! towards `+Y`.

use nalgebra::{Matrix3, Matrix4, Point3, Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-6;

/// Element of SE(3): `x -> R x + t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    /// Rotation by `angle` radians about `axis` (right-hand rule), then
    /// translation by `t`.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64, t: Vector3<f64>) -> Self {
        let rotation = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        Self {
            rotation: *rotation.matrix(),
            translation: t,
        }
    }

    /// Checks `RᵀR = I` and `det R = 1` within 1e-6.
    pub fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation.iter().chain(translation.iter()).all(|x| x.is_finite()) {
            return Err(Error::invalid("transform contains non-finite entries"));
        }
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if ortho > ORTHONORMAL_TOL {
            return Err(Error::invalid(format!(
                "rotation block is not orthonormal (max |RᵀR - I| = {ortho:e})"
            )));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::invalid(format!(
                "rotation block has determinant {det}, expected 1"
            )));
        }
        Ok(Self { rotation, translation })
    }

    /// Homogeneous 4×4 matrix; the bottom row must be exactly `[0, 0, 0, 1]`.
    pub fn from_matrix(m: &Matrix4<f64>) -> Result<Self> {
        let bottom = [m[(3, 0)], m[(3, 1)], m[(3, 2)], m[(3, 3)]];
        if bottom != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::invalid(format!(
                "bottom row of a rigid transform must be [0,0,0,1], got {bottom:?}"
            )));
        }
        Self::from_parts(
            m.fixed_view::<3, 3>(0, 0).into_owned(),
            m.fixed_view::<3, 1>(0, 3).into_owned(),
        )
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::from_matrix(&Matrix4::from_fn(|r, c| rows[r][c]))
    }

    /// Exact (bitwise) identity test.
    pub fn is_identity(&self) -> bool {
        self.rotation == Matrix3::identity() && self.translation == Vector3::zeros()
    }

    #[inline]
    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    #[inline]
    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn rows(&self) -> [[f64; 4]; 4] {
        let m = self.matrix();
        std::array::from_fn(|r| std::array::from_fn(|c| m[(r, c)]))
    }

    #[inline]
    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    #[inline]
    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Largest absolute entry-wise difference of the homogeneous matrices.
    pub fn max_abs_diff(&self, other: &RigidTransform) -> f64 {
        (self.matrix() - other.matrix()).abs().max()
    }
}

/// Relative transform taking source-camera coordinates to target-camera
/// coordinates, given both cameras' world-to-camera extrinsics.
pub fn relative_pose(source: &RigidTransform, target: &RigidTransform) -> RigidTransform {
    target.compose(&source.inverse())
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Rows([[f64; 4]; 4]),
    Flat([f64; 16]),
}

impl TryFrom<MatrixRepr> for RigidTransform {
    type Error = Error;

    fn try_from(m: MatrixRepr) -> Result<Self> {
        match m {
            MatrixRepr::Rows(rows) => RigidTransform::from_rows(rows),
            MatrixRepr::Flat(flat) => {
                RigidTransform::from_rows(std::array::from_fn(|r| std::array::from_fn(|c| flat[r * 4 + c])))
            }
        }
    }
}

impl From<RigidTransform> for MatrixRepr {
    fn from(t: RigidTransform) -> Self {
        MatrixRepr::Rows(t.rows())
    }
}

/// Camera placement on a sphere around the origin, in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOrbit")]
pub struct OrbitPose {
    pub azimuth: f64,
    pub elevation: f64,
    pub radius: f64,
}

#[derive(Deserialize)]
struct RawOrbit {
    azimuth: f64,
    elevation: f64,
    radius: f64,
}

impl TryFrom<RawOrbit> for OrbitPose {
    type Error = Error;

    fn try_from(r: RawOrbit) -> Result<Self> {
        OrbitPose::new(r.azimuth, r.elevation, r.radius)
    }
}

impl OrbitPose {
    pub fn new(azimuth: f64, elevation: f64, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!("orbit radius must be positive, got {radius}")));
        }
        if !(0.0..360.0).contains(&azimuth) {
            return Err(Error::invalid(format!("azimuth {azimuth} is outside [0, 360)")));
        }
        if !(-90.0..=90.0).contains(&elevation) {
            return Err(Error::invalid(format!("elevation {elevation} is outside [-90, 90]")));
        }
        Ok(Self {
            azimuth,
            elevation,
            radius,
        })
    }

    /// Wraps any finite azimuth into `[0, 360)` before validating.
    pub fn wrapped(azimuth: f64, elevation: f64, radius: f64) -> Result<Self> {
        let mut az = azimuth.rem_euclid(360.0);
        if az >= 360.0 {
            az = 0.0;
        }
        Self::new(az, elevation, radius)
    }

    /// Camera centre in world coordinates.
    pub fn position(&self) -> Point3<f64> {
        let (az, el) = (self.azimuth.to_radians(), self.elevation.to_radians());
        Point3::new(
            self.radius * el.cos() * az.sin(),
            self.radius * el.sin(),
            -self.radius * el.cos() * az.cos(),
        )
    }

    /// World-to-camera extrinsic of a camera at this orbit position looking
    /// at the origin with world `+Y` as up.
    pub fn extrinsic(&self) -> Result<RigidTransform> {
        pose_from_orbit(self)
    }
}

/// World-to-camera extrinsic for an orbit pose. Fails at elevation ±90°,
/// where the view axis is parallel to the world up-vector.
pub fn pose_from_orbit(pose: &OrbitPose) -> Result<RigidTransform> {
    if pose.elevation.abs() >= 90.0 {
        return Err(Error::DegenerateOrbit(pose.elevation));
    }
    let centre = pose.position();
    let forward = (-centre.coords).normalize();
    let right = forward.cross(&Vector3::y()).normalize();
    let down = forward.cross(&right);
    let rotation = Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
    let translation = -(rotation * centre.coords);
    Ok(RigidTransform { rotation, translation })
}
