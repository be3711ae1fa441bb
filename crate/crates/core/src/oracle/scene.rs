use nalgebra::{Point2, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RigidTransform;

/// Two-colour procedural checkerboard evaluated in the primitive's local
/// frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checker {
    /// Edge length of one square, in scene units.
    pub period: f64,
    pub colors: [[f32; 3]; 2],
}

/// The warm/cool checker of [`scenes::warm_checker`] with period 0.25.
impl Default for Checker {
    fn default() -> Self {
        scenes::warm_checker(0.25)
    }
}

impl Checker {
    pub fn new(period: f64, a: [f32; 3], b: [f32; 3]) -> Self {
        Self { period, colors: [a, b] }
    }

    fn cell(&self, x: f64) -> i64 {
        (x / self.period).floor() as i64
    }

    pub fn color2(&self, p: Point2<f64>) -> [f32; 3] {
        self.colors[(self.cell(p.x) + self.cell(p.y)).rem_euclid(2) as usize]
    }

    pub fn color3(&self, p: Point3<f64>) -> [f32; 3] {
        self.colors[(self.cell(p.x) + self.cell(p.y) + self.cell(p.z)).rem_euclid(2) as usize]
    }
}

/// Box size: a single edge length (cube) or per-axis extents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extent {
    Cube(f64),
    Box([f64; 3]),
}

impl Extent {
    pub fn half(&self) -> Vector3<f64> {
        match *self {
            Extent::Cube(s) => Vector3::repeat(s / 2.0),
            Extent::Box(s) => Vector3::from(s) / 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    /// Rectangle in the local `z = 0` plane centred on the origin, visible
    /// from both sides.
    Plane {
        size: [f64; 2],
    },
    /// Axis-aligned box centred on the local origin.
    Cube {
        size: Extent,
    },
    Sphere {
        radius: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    #[serde(flatten)]
    pub shape: Shape,
    /// Object-to-world placement.
    #[serde(default)]
    pub pose: RigidTransform,
    #[serde(default)]
    pub texture: Checker,
    /// Evaluate the texture on `|x|` so it is mirror-symmetric about the
    /// local `x = 0` plane.
    #[serde(default)]
    pub symmetric: bool,
}

impl Primitive {
    pub fn new(shape: Shape, pose: RigidTransform, texture: Checker) -> Self {
        Self {
            shape,
            pose,
            texture,
            symmetric: false,
        }
    }

    pub fn mirrored(mut self) -> Self {
        self.symmetric = true;
        self
    }

    fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let ok = match self.shape {
            Shape::Plane { size } => size.iter().all(|&s| positive(s)),
            Shape::Cube { size: Extent::Cube(s) } => positive(s),
            Shape::Cube { size: Extent::Box(s) } => s.iter().all(|&s| positive(s)),
            Shape::Sphere { radius } => positive(radius),
        };
        if !ok {
            return Err(Error::invalid(format!(
                "primitive sizes must be positive: {:?}",
                self.shape
            )));
        }
        if !positive(self.texture.period) {
            return Err(Error::invalid(format!(
                "texture period must be positive, got {}",
                self.texture.period
            )));
        }
        Ok(())
    }
}

/// Collection of analytic primitives rendered by the oracle.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScene")]
pub struct SceneSpec {
    pub primitives: Vec<Primitive>,
}

#[derive(Deserialize)]
struct RawScene {
    #[serde(default)]
    primitives: Vec<Primitive>,
}

impl TryFrom<RawScene> for SceneSpec {
    type Error = Error;

    fn try_from(r: RawScene) -> Result<Self> {
        SceneSpec::new(r.primitives)
    }
}

impl SceneSpec {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self> {
        for p in &primitives {
            p.validate()?;
        }
        Ok(Self { primitives })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Ready-made scenes used by the tests, benches and CLI examples.
pub mod scenes {
    use super::*;

    pub fn warm_checker(period: f64) -> Checker {
        Checker::new(period, [0.85, 0.55, 0.35], [0.45, 0.6, 0.8])
    }

    /// Axis-aligned cube of edge `size` centred on the world origin.
    pub fn cube(size: f64, texture: Checker) -> SceneSpec {
        SceneSpec {
            primitives: vec![Primitive::new(
                Shape::Cube {
                    size: Extent::Cube(size),
                },
                RigidTransform::identity(),
                texture,
            )],
        }
    }

    /// `width`×`height` rectangle facing `-Z` (towards an orbit camera at
    /// azimuth 0), centred on the world origin.
    pub fn plane(width: f64, height: f64, texture: Checker) -> SceneSpec {
        SceneSpec {
            primitives: vec![Primitive::new(
                Shape::Plane { size: [width, height] },
                RigidTransform::identity(),
                texture,
            )],
        }
    }

    /// Chair-like arrangement of boxes, mirror-symmetric (geometry and
    /// texture) about the world `x = 0` plane.
    pub fn symmetric_chair() -> SceneSpec {
        let wood = Checker::new(0.2, [0.8, 0.45, 0.25], [0.35, 0.55, 0.75]);
        let boxed = |size: [f64; 3], at: [f64; 3]| {
            Primitive::new(
                Shape::Cube {
                    size: Extent::Box(size),
                },
                RigidTransform::from_translation(Vector3::from(at)),
                wood,
            )
            .mirrored()
        };
        let mut primitives = vec![
            boxed([1.0, 0.15, 1.0], [0.0, 0.0, 0.0]),
            boxed([1.0, 0.9, 0.15], [0.0, 0.525, 0.425]),
        ];
        for x in [-0.4, 0.4] {
            for z in [-0.4, 0.4] {
                primitives.push(boxed([0.12, 0.6, 0.12], [x, -0.375, z]));
            }
        }
        SceneSpec { primitives }
    }
}
