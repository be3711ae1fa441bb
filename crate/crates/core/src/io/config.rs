use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{load_depth, load_image, read_file};
use crate::error::{Error, Result};
use crate::geometry::{relative_pose, CameraIntrinsics, OrbitPose, RigidTransform};
use crate::losses::{CompletionWeights, DepthLossWeights, SsimParams};
use crate::multiview::{ReconstructOptions, ViewRecord};
use crate::warping::{CoarseOptions, Symmetry, SymmetryPlane, DEFAULT_MERGE_RADIUS};

/// Reads and deserializes a JSON file.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|source| Error::ConfigFile {
        path: path.to_path_buf(),
        source,
    })
}

/// `{"fx":..,"fy":..,"cx":..,"cy":..,"width":..,"height":..}`
pub fn load_intrinsics(path: &Path) -> Result<CameraIntrinsics> {
    load_json(path)
}

fn from_value<T: DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(Error::from)
}

fn single_key(map: &serde_json::Map<String, Value>) -> Option<&str> {
    (map.len() == 1)
        .then(|| map.keys().next().map(String::as_str))
        .flatten()
}

/// A camera pose. Accepted forms:
///
/// * `{"azimuth":..,"elevation":..,"radius":..}` or `{"orbit":{..}}`
/// * `{"world_to_camera": M}` / `{"camera_to_world": M}` with `M` a
///   row-major 4×4 matrix (nested rows or 16 numbers)
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Value", rename_all = "snake_case")]
pub enum PoseSpec {
    Orbit(OrbitPose),
    WorldToCamera(RigidTransform),
    CameraToWorld(RigidTransform),
}

impl TryFrom<Value> for PoseSpec {
    type Error = Error;

    fn try_from(v: Value) -> Result<Self> {
        let Value::Object(map) = &v else {
            return Err(Error::invalid(
                "a pose must be an orbit record or {\"world_to_camera\"|\"camera_to_world\": matrix}",
            ));
        };
        if map.contains_key("azimuth") {
            return Ok(Self::Orbit(from_value(v)?));
        }
        match single_key(map) {
            Some("orbit") => Ok(Self::Orbit(from_value(map["orbit"].clone())?)),
            Some("world_to_camera") => Ok(Self::WorldToCamera(from_value(map["world_to_camera"].clone())?)),
            Some("camera_to_world") => Ok(Self::CameraToWorld(from_value(map["camera_to_world"].clone())?)),
            _ => Err(Error::invalid(format!(
                "unrecognised pose keys {:?}",
                map.keys().collect::<Vec<_>>()
            ))),
        }
    }
}

impl PoseSpec {
    pub fn world_to_camera(&self) -> Result<RigidTransform> {
        match self {
            Self::Orbit(o) => o.extrinsic(),
            Self::WorldToCamera(m) => Ok(*m),
            Self::CameraToWorld(m) => Ok(m.inverse()),
        }
    }

    pub fn camera_to_world(&self) -> Result<RigidTransform> {
        match self {
            Self::CameraToWorld(m) => Ok(*m),
            other => Ok(other.world_to_camera()?.inverse()),
        }
    }
}

/// Relative-pose file: either a bare 4×4 matrix θ (source camera to target
/// camera) or `{"source": pose, "target": pose}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PoseFile {
    Relative(RigidTransform),
    Pair { source: PoseSpec, target: PoseSpec },
}

impl<'de> Deserialize<'de> for PoseFile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        let parsed = match &v {
            Value::Object(map) if map.contains_key("source") || map.contains_key("target") => {
                match (map.get("source"), map.get("target"), map.len()) {
                    (Some(s), Some(t), 2) => Ok(PoseFile::Pair {
                        source: from_value(s.clone()).map_err(serde::de::Error::custom)?,
                        target: from_value(t.clone()).map_err(serde::de::Error::custom)?,
                    }),
                    _ => Err("a pose pair needs exactly \"source\" and \"target\""),
                }
            }
            Value::Array(_) => {
                return from_value(v).map(PoseFile::Relative).map_err(serde::de::Error::custom);
            }
            _ => Err("expected a 4x4 matrix or {\"source\":..,\"target\":..}"),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

impl PoseFile {
    /// θ mapping source-camera coordinates to target-camera coordinates.
    pub fn relative(&self) -> Result<RigidTransform> {
        match self {
            Self::Relative(m) => Ok(*m),
            Self::Pair { source, target } => Ok(relative_pose(&source.world_to_camera()?, &target.world_to_camera()?)),
        }
    }

    /// World-to-camera pose of the source, when the file names one.
    pub fn source(&self) -> Result<Option<RigidTransform>> {
        match self {
            Self::Relative(_) => Ok(None),
            Self::Pair { source, .. } => source.world_to_camera().map(Some),
        }
    }
}

pub fn load_relative_pose(path: &Path) -> Result<PoseFile> {
    load_json(path)
}

/// Intrinsics given inline or as a path to a JSON file (relative paths are
/// resolved against the referring file's directory).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntrinsicsSource {
    Path(PathBuf),
    Inline(CameraIntrinsics),
}

impl IntrinsicsSource {
    pub fn resolve(&self, base: &Path) -> Result<CameraIntrinsics> {
        match self {
            Self::Inline(k) => Ok(*k),
            Self::Path(p) => load_intrinsics(&base.join(p)),
        }
    }
}

/// Mirror-symmetry settings. The plane lives in the object frame; the
/// object is placed either directly in the source camera
/// (`object_to_camera`) or in the world (`object_to_world`, default identity),
/// in which case the source camera pose must be known.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryConfig {
    #[serde(default)]
    pub plane: SymmetryPlane,
    #[serde(default)]
    pub object_to_camera: Option<RigidTransform>,
    #[serde(default)]
    pub object_to_world: Option<RigidTransform>,
    #[serde(default = "default_merge_radius")]
    pub merge_radius: f64,
}

fn default_merge_radius() -> f64 {
    DEFAULT_MERGE_RADIUS
}

impl Default for SymmetryConfig {
    fn default() -> Self {
        Self {
            plane: SymmetryPlane::default(),
            object_to_camera: None,
            object_to_world: None,
            merge_radius: DEFAULT_MERGE_RADIUS,
        }
    }
}

impl SymmetryConfig {
    pub fn resolve(&self, source_world_to_camera: Option<&RigidTransform>) -> Result<Symmetry> {
        let object_to_camera = match (self.object_to_camera, source_world_to_camera) {
            (Some(m), _) => m,
            (None, Some(w2c)) => w2c.compose(&self.object_to_world.unwrap_or_else(RigidTransform::identity)),
            (None, None) => {
                return Err(Error::invalid(
                    "symmetry needs object_to_camera, or a source pose to place the object",
                ))
            }
        };
        if !(self.merge_radius.is_finite() && self.merge_radius >= 0.0) {
            return Err(Error::invalid(format!(
                "merge radius {} must be >= 0",
                self.merge_radius
            )));
        }
        Ok(Symmetry {
            plane: self.plane,
            object_to_camera,
            merge_radius: self.merge_radius,
        })
    }
}

/// Options shared by the CLI subcommands; every field is optional in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub intrinsics: Option<IntrinsicsSource>,
    pub source: Option<PoseSpec>,
    pub target: Option<PoseSpec>,
    pub cull: bool,
    /// Back-face threshold on the cosine, in `[-1, 1)`.
    pub epsilon: f64,
    pub symmetry: Option<SymmetryConfig>,
    /// SSIM used by the `metrics` subcommand.
    pub ssim: SsimParams,
    pub depth_loss: DepthLossWeights,
    pub completion: CompletionWeights,
    pub prune: bool,
    pub prune_sigmas: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            intrinsics: None,
            source: None,
            target: None,
            cull: false,
            epsilon: 0.0,
            symmetry: None,
            ssim: SsimParams::evaluation(),
            depth_loss: DepthLossWeights::default(),
            completion: CompletionWeights::default(),
            prune: false,
            prune_sigmas: 3.0,
        }
    }
}

impl PipelineConfig {
    /// Loads and validates a config; relative paths inside it are resolved
    /// against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: Self = load_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(IntrinsicsSource::Path(p)) = &cfg.intrinsics {
            let k = load_intrinsics(&base.join(p))?;
            cfg.intrinsics = Some(IntrinsicsSource::Inline(k));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(-1.0..1.0).contains(&self.epsilon) {
            return Err(Error::invalid(format!("epsilon {} is outside [-1, 1)", self.epsilon)));
        }
        if !(self.prune_sigmas.is_finite() && self.prune_sigmas > 0.0) {
            return Err(Error::invalid(format!(
                "prune_sigmas {} must be positive",
                self.prune_sigmas
            )));
        }
        for (name, w) in [
            ("depth_loss.alpha", self.depth_loss.alpha),
            ("depth_loss.smoothness", self.depth_loss.smoothness),
            ("completion.discriminator", self.completion.discriminator),
            ("completion.generator", self.completion.generator),
            ("completion.perceptual", self.completion.perceptual),
        ] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invalid(format!("{name} = {w} must be a non-negative number")));
            }
        }
        if self.depth_loss.alpha > 1.0 {
            return Err(Error::invalid("depth_loss.alpha must lie in [0, 1]"));
        }
        self.ssim.validate()?;
        self.depth_loss.ssim.validate()?;
        self.completion.ssim.validate()
    }

    /// Source/target relative pose from the `source` and `target` entries.
    pub fn relative_pose(&self) -> Result<Option<RigidTransform>> {
        match (&self.source, &self.target) {
            (Some(s), Some(t)) => Ok(Some(relative_pose(&s.world_to_camera()?, &t.world_to_camera()?))),
            _ => Ok(None),
        }
    }

    pub fn coarse_options(&self, source_world_to_camera: Option<&RigidTransform>) -> Result<CoarseOptions> {
        let own = self.source.map(|s| s.world_to_camera()).transpose()?;
        let source = source_world_to_camera.or(own.as_ref());
        Ok(CoarseOptions {
            cull: self.cull,
            epsilon: self.epsilon,
            symmetry: self.symmetry.map(|s| s.resolve(source)).transpose()?,
        })
    }

    pub fn reconstruct_options(&self) -> ReconstructOptions {
        ReconstructOptions {
            prune: self.prune,
            sigmas: self.prune_sigmas,
        }
    }
}

/// One entry of a views manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewEntry {
    pub image: PathBuf,
    pub depth: PathBuf,
    pub pose: PoseSpec,
    #[serde(default)]
    pub intrinsics: Option<IntrinsicsSource>,
}

/// `{"intrinsics": K | "k.json", "views": [{"image","depth","pose"}, ..]}`;
/// per-view intrinsics override the shared ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewsManifest {
    #[serde(default)]
    pub intrinsics: Option<IntrinsicsSource>,
    pub views: Vec<ViewEntry>,
}

impl ViewsManifest {
    pub fn load_views(&self, base: &Path) -> Result<Vec<ViewRecord>> {
        let shared = self.intrinsics.as_ref().map(|k| k.resolve(base)).transpose()?;
        self.views
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                let k = match (&entry.intrinsics, shared) {
                    (Some(k), _) => k.resolve(base)?,
                    (None, Some(k)) => k,
                    (None, None) => return Err(Error::invalid(format!("view {i} has no intrinsics"))),
                };
                ViewRecord::new(
                    load_image(&base.join(&entry.image))?,
                    load_depth(&base.join(&entry.depth))?,
                    k,
                    entry.pose.camera_to_world()?,
                )
            })
            .collect()
    }
}

/// Loads a views manifest and every image and depth map it references.
pub fn load_views(path: &Path) -> Result<Vec<ViewRecord>> {
    let manifest: ViewsManifest = load_json(path)?;
    manifest.load_views(path.parent().unwrap_or(Path::new("")))
}
