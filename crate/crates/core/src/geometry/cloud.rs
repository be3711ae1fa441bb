use nalgebra::{Point3, Vector3};

use super::camera::CameraIntrinsics;
use super::transform::RigidTransform;
use crate::error::{check_dims, Error, Result};
use crate::image::{DepthMap, RgbImage};

/// Where a point came from: the view it was back-projected from and its
/// source pixel. `mirrored` marks copies added by symmetry completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PointOrigin {
    pub view: u32,
    pub u: u32,
    pub v: u32,
    pub mirrored: bool,
}

/// Coloured points in a camera (or world) frame.
///
/// `origins` and `normals` are optional per-point attributes; when present
/// they are parallel to `points`. A zero normal means "unknown".
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
    pub colors: Vec<[f32; 3]>,
    pub origins: Option<Vec<PointOrigin>>,
    pub normals: Option<Vec<Vector3<f64>>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>, colors: Vec<[f32; 3]>) -> Result<Self> {
        let cloud = Self {
            points,
            colors,
            origins: None,
            normals: None,
        };
        cloud.validate()?;
        Ok(cloud)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if self.colors.len() != n
            || self.origins.as_ref().is_some_and(|o| o.len() != n)
            || self.normals.as_ref().is_some_and(|o| o.len() != n)
        {
            return Err(Error::invalid("point cloud attribute lengths differ"));
        }
        if self.points.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(Error::invalid("point cloud contains non-finite coordinates"));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps the points for which `keep(index)` is true, with all attributes.
    pub fn retain_indices(&self, mut keep: impl FnMut(usize) -> bool) -> PointCloud {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        PointCloud {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            colors: idx.iter().map(|&i| self.colors[i]).collect(),
            origins: self.origins.as_ref().map(|o| idx.iter().map(|&i| o[i]).collect()),
            normals: self.normals.as_ref().map(|o| idx.iter().map(|&i| o[i]).collect()),
        }
    }

    /// Appends `other`. Optional attributes survive only if both clouds carry
    /// them (or one side is empty).
    pub fn extend(&mut self, other: PointCloud) {
        fn merge<T>(a: &mut Option<Vec<T>>, a_len: usize, b: Option<Vec<T>>, b_len: usize) {
            *a = match (a.take(), b) {
                (Some(mut x), Some(y)) => {
                    x.extend(y);
                    Some(x)
                }
                (Some(x), None) if b_len == 0 => Some(x),
                (None, Some(y)) if a_len == 0 => Some(y),
                _ => None,
            };
        }
        let (a_len, b_len) = (self.len(), other.len());
        merge(&mut self.origins, a_len, other.origins, b_len);
        merge(&mut self.normals, a_len, other.normals, b_len);
        self.points.extend(other.points);
        self.colors.extend(other.colors);
    }

    /// Axis-aligned bounding box, `None` for an empty cloud.
    pub fn bounds(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let first = *self.points.first()?;
        Some(
            self.points
                .iter()
                .fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p))),
        )
    }
}

/// Lifts every valid depth pixel to a camera-frame point `K⁻¹ · D(u,v) · [u, v, 1]ᵀ`
/// carrying the pixel's colour. Points are emitted in row-major pixel order.
pub fn backproject(depth: &DepthMap, k: &CameraIntrinsics, image: &RgbImage) -> Result<PointCloud> {
    check_dims("depth map", k.dims(), depth.dims())?;
    check_dims("image", k.dims(), image.dims())?;
    if image.channels() != 3 {
        return Err(Error::invalid("back-projection needs a three-channel image"));
    }
    let n = depth.valid_count();
    let mut cloud = PointCloud {
        points: Vec::with_capacity(n),
        colors: Vec::with_capacity(n),
        origins: Some(Vec::with_capacity(n)),
        normals: None,
    };
    let origins = cloud.origins.as_mut().expect("just set");
    for v in 0..depth.height() {
        for u in 0..depth.width() {
            let d = depth.get(u, v);
            if d > 0.0 {
                cloud.points.push(k.backproject_pixel(u as f64, v as f64, d));
                cloud.colors.push(image.rgb(u, v));
                origins.push(PointOrigin {
                    view: 0,
                    u: u as u32,
                    v: v as u32,
                    mirrored: false,
                });
            }
        }
    }
    Ok(cloud)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectedPoint {
    /// Index of the point in the input cloud.
    pub index: usize,
    pub u: f64,
    pub v: f64,
    pub depth: f64,
    pub color: [f32; 3],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Projection {
    pub points: Vec<ProjectedPoint>,
    /// Points with `Z <= 0` that could not be projected.
    pub dropped: usize,
}

/// Pinhole projection of a camera-frame cloud. Points at or behind the
/// camera plane are dropped and counted.
pub fn project(cloud: &PointCloud, k: &CameraIntrinsics) -> Projection {
    let mut out = Projection {
        points: Vec::with_capacity(cloud.len()),
        dropped: 0,
    };
    for (index, (p, &color)) in cloud.points.iter().zip(&cloud.colors).enumerate() {
        match k.project_point(p) {
            Some((u, v)) => out.points.push(ProjectedPoint {
                index,
                u,
                v,
                depth: p.z,
                color,
            }),
            None => out.dropped += 1,
        }
    }
    out
}

/// Applies `theta` to every point (and normal); colours and order are kept.
pub fn transform_cloud(cloud: &PointCloud, theta: &RigidTransform) -> PointCloud {
    PointCloud {
        points: cloud.points.iter().map(|p| theta.apply(p)).collect(),
        colors: cloud.colors.clone(),
        origins: cloud.origins.clone(),
        normals: cloud
            .normals
            .as_ref()
            .map(|ns| ns.iter().map(|n| theta.apply_vector(n)).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn unit_camera(w: usize, h: usize) -> CameraIntrinsics {
        CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0, w, h).unwrap()
    }

    fn single_depth(w: usize, h: usize, at: (usize, usize), d: f64) -> DepthMap {
        DepthMap::from_fn(w, h, |u, v| if (u, v) == at { d } else { 0.0 }).unwrap()
    }

    #[test]
    fn principal_ray_backprojection() {
        let k = unit_camera(3, 2);
        let img = RgbImage::from_fn(3, 2, 3, |u, v, c| (u + v + c) as f32 / 10.0);
        let cloud = backproject(&single_depth(3, 2, (0, 0), 1.0), &k, &img).unwrap();
        assert_eq!(cloud.points, vec![Point3::new(0.0, 0.0, 1.0)]);
        assert_eq!(cloud.colors, vec![[0.0, 0.1, 0.2]]);
    }

    #[test]
    fn off_axis_backprojection() {
        let k = unit_camera(3, 2);
        let img = RgbImage::black(3, 2);
        let cloud = backproject(&single_depth(3, 2, (2, 1), 2.0), &k, &img).unwrap();
        assert_eq!(cloud.points, vec![Point3::new(4.0, 2.0, 2.0)]);
        assert_eq!(
            cloud.origins.unwrap()[0],
            PointOrigin {
                view: 0,
                u: 2,
                v: 1,
                mirrored: false
            }
        );
    }

    #[test]
    fn empty_depth_gives_empty_cloud() {
        let k = unit_camera(4, 4);
        let cloud = backproject(&DepthMap::empty(4, 4), &k, &RgbImage::black(4, 4)).unwrap();
        assert!(cloud.is_empty());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let k = unit_camera(4, 4);
        assert!(matches!(
            backproject(&DepthMap::empty(4, 3), &k, &RgbImage::black(4, 4)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(backproject(&DepthMap::empty(4, 4), &k, &RgbImage::black(5, 4)).is_err());
    }

    #[test]
    fn projection_examples() {
        let k = unit_camera(8, 8);
        let cloud = PointCloud::new(
            vec![
                Point3::new(0.0, 0.0, 1.0),
                Point3::new(4.0, 2.0, 2.0),
                Point3::new(0.0, 0.0, -1.0),
                Point3::new(1.0, 1.0, 0.0),
            ],
            vec![[1.0, 0.0, 0.0]; 4],
        )
        .unwrap();
        let proj = project(&cloud, &k);
        assert_eq!(proj.dropped, 2);
        assert_eq!(
            (proj.points[0].u, proj.points[0].v, proj.points[0].depth),
            (0.0, 0.0, 1.0)
        );
        assert_eq!(
            (proj.points[1].u, proj.points[1].v, proj.points[1].depth),
            (2.0, 1.0, 2.0)
        );
        assert_eq!(proj.points[1].index, 1);
    }

    #[test]
    fn transform_examples() {
        let cloud = PointCloud::new(
            vec![Point3::new(0.3, -1.7, 2.9), Point3::new(1.0, 0.0, 0.0)],
            vec![[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]],
        )
        .unwrap();
        assert_eq!(transform_cloud(&cloud, &RigidTransform::identity()), cloud);

        let shifted = transform_cloud(
            &PointCloud::new(vec![Point3::new(0.0, 0.0, 1.0)], vec![[0.0; 3]]).unwrap(),
            &RigidTransform::from_translation(Vector3::new(1.0, 0.0, 0.0)),
        );
        assert_eq!(shifted.points[0], Point3::new(1.0, 0.0, 1.0));

        let yaw = RigidTransform::from_axis_angle(Vector3::y(), FRAC_PI_2, Vector3::zeros());
        let turned = transform_cloud(&cloud, &yaw);
        assert!((turned.points[1] - Point3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
        assert_eq!(turned.colors, cloud.colors);
    }

    #[test]
    fn extend_merges_attributes() {
        let k = unit_camera(2, 1);
        let d = DepthMap::from_vec(2, 1, vec![1.0, 2.0]).unwrap();
        let mut a = backproject(&d, &k, &RgbImage::black(2, 1)).unwrap();
        let b = a.clone();
        a.extend(b);
        assert_eq!(a.len(), 4);
        assert_eq!(a.origins.as_ref().unwrap().len(), 4);
        a.extend(PointCloud::new(vec![Point3::origin()], vec![[0.0; 3]]).unwrap());
        assert!(a.origins.is_none());
        a.validate().unwrap();
    }
}
