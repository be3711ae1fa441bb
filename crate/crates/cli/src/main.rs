//! `pointwarp` command-line tool.
//!
//! Exit status: 0 on success, 1 for bad input (arguments, files, data),
//! 2 for internal failures (e.g. an output that could not be written).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use pointwarp::io::{
    load_depth, load_image, load_intrinsics, load_json, load_relative_pose, load_views, save_depth, save_image,
    save_ply, PipelineConfig, PlyFormat, PoseSpec, SymmetryConfig,
};
use pointwarp::losses::{l1_metric, masked_l1, ssim};
use pointwarp::multiview::{coarse_from_fused, fuse_clouds, reconstruct_360};
use pointwarp::oracle::{render, SceneSpec};
use pointwarp::warping::{backward_warp, coarse_view, forward_warp, CoarseView};
use pointwarp::{backproject, CameraIntrinsics, Error, Mask, OrbitPose, RgbImage, RigidTransform};

#[derive(Parser)]
#[command(name = "pointwarp", version, about = "Point-cloud warping for novel view synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lift an RGB-D image to a coloured point cloud (PLY).
    Backproject(BackprojectArgs),
    /// Splat a source image into the target view.
    WarpForward(WarpArgs),
    /// Resample a target image at the source pixels' flow positions.
    WarpBackward(WarpBackwardArgs),
    /// Coarse target view with optional occlusion removal and symmetry.
    Coarse(CoarseArgs),
    /// L1 and SSIM between two images.
    Metrics(MetricsArgs),
    /// Fuse several posed RGB-D views into one cloud.
    Fuse(FuseArgs),
    /// Reconstruct an object from views all around it.
    Recon360(Recon360Args),
    /// Ray-trace an analytic scene.
    Render(RenderArgs),
}

#[derive(Args)]
struct Common {
    /// Pipeline options (JSON); explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print a machine-readable summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SourceArgs {
    /// Source RGB image (PNG).
    #[arg(long = "in")]
    input: PathBuf,
    /// Source depth map (PFM).
    #[arg(long)]
    depth: PathBuf,
    /// Intrinsics JSON; may instead come from --config.
    #[arg(long)]
    k: Option<PathBuf>,
}

#[derive(Args)]
struct BackprojectArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output PLY.
    #[arg(long)]
    out: PathBuf,
    /// Write binary little-endian PLY instead of ascii.
    #[arg(long)]
    binary: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct WarpArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Relative pose: 4×4 matrix or {"source":..,"target":..}.
    #[arg(long)]
    pose: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Coverage mask PNG.
    #[arg(long)]
    mask_out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct WarpBackwardArgs {
    /// Target-view image to sample from (PNG).
    #[arg(long)]
    target: PathBuf,
    /// Source depth map (PFM).
    #[arg(long)]
    depth: PathBuf,
    #[arg(long)]
    k: Option<PathBuf>,
    #[arg(long)]
    pose: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Validity mask PNG.
    #[arg(long)]
    mask_out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CoarseOpts {
    /// Remove back-facing points.
    #[arg(long)]
    cull: bool,
    /// Back-face threshold (cosine).
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Mirror across the object's x = 0 plane (object at the world origin).
    #[arg(long)]
    symmetric: bool,
}

#[derive(Args)]
struct CoarseArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    pose: Option<PathBuf>,
    #[command(flatten)]
    opts: CoarseOpts,
    #[arg(long)]
    out: PathBuf,
    /// Coverage mask PNG [default: <out>_mask.png].
    #[arg(long)]
    mask_out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Restrict L1 to the white pixels of this mask PNG.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct FuseArgs {
    /// Views manifest JSON.
    #[arg(long)]
    views: PathBuf,
    /// Index of the view whose camera frame the cloud is expressed in.
    #[arg(long, default_value_t = 0)]
    reference: usize,
    /// Output PLY.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    binary: bool,
    /// World pose of a camera to render a coarse view for.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Coarse view PNG (needs --target).
    #[arg(long, requires = "target")]
    coarse_out: Option<PathBuf>,
    #[command(flatten)]
    opts: CoarseOpts,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Recon360Args {
    #[arg(long)]
    views: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    binary: bool,
    /// Drop nearest-neighbour outliers.
    #[arg(long)]
    prune: bool,
    /// Outlier threshold in standard deviations.
    #[arg(long)]
    sigmas: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RenderArgs {
    /// Scene JSON.
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    k: Option<PathBuf>,
    /// Camera on the orbit, e.g. "az=20,el=10,r=3".
    #[arg(long, value_parser = parse_orbit, conflicts_with = "pose")]
    orbit: Option<OrbitPose>,
    /// Camera pose JSON (orbit record or matrix form).
    #[arg(long)]
    pose: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    depth_out: Option<PathBuf>,
    /// Foreground mask PNG.
    #[arg(long)]
    mask_out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn parse_orbit(s: &str) -> Result<OrbitPose, String> {
    let (mut az, mut el, mut r) = (None, None, None);
    for part in s.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("invalid number in {part:?}"))?;
        let slot = match key.trim() {
            "az" | "azimuth" => &mut az,
            "el" | "elevation" => &mut el,
            "r" | "radius" => &mut r,
            other => return Err(format!("unknown orbit key {other:?}")),
        };
        *slot = Some(value);
    }
    let (Some(az), Some(el), Some(r)) = (az, el, r) else {
        return Err("orbit needs az, el and r".into());
    };
    OrbitPose::wrapped(az, el, r).map_err(|e| e.to_string())
}

type Res<T> = Result<T, Error>;

fn config(common: &Common) -> Res<PipelineConfig> {
    common
        .config
        .as_deref()
        .map(PipelineConfig::load)
        .transpose()
        .map(Option::unwrap_or_default)
}

fn intrinsics(flag: Option<&Path>, cfg: &PipelineConfig) -> Res<CameraIntrinsics> {
    match (flag, &cfg.intrinsics) {
        (Some(p), _) => load_intrinsics(p),
        // paths were already resolved by PipelineConfig::load
        (None, Some(src)) => src.resolve(Path::new("")),
        (None, None) => Err(Error::InvalidInput(
            "intrinsics required: pass --k or set them in --config".into(),
        )),
    }
}

/// Relative pose and, when known, the source camera's world-to-camera pose.
fn relative(flag: Option<&Path>, cfg: &PipelineConfig) -> Res<(RigidTransform, Option<RigidTransform>)> {
    if let Some(p) = flag {
        let file = load_relative_pose(p)?;
        return Ok((file.relative()?, file.source()?));
    }
    match cfg.relative_pose()? {
        Some(theta) => Ok((theta, cfg.source.map(|s| s.world_to_camera()).transpose()?)),
        None => Err(Error::InvalidInput(
            "relative pose required: pass --pose or set source and target in --config".into(),
        )),
    }
}

fn apply_coarse_flags(cfg: &mut PipelineConfig, opts: &CoarseOpts) {
    cfg.cull |= opts.cull;
    if let Some(e) = opts.epsilon {
        cfg.epsilon = e;
    }
    if opts.symmetric && cfg.symmetry.is_none() {
        cfg.symmetry = Some(SymmetryConfig::default());
    }
}

fn mask_image(mask: &Mask) -> RgbImage {
    RgbImage::from_fn(
        mask.width(),
        mask.height(),
        3,
        |u, v, _| if mask.get(u, v) { 1.0 } else { 0.0 },
    )
}

fn default_mask_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}_mask.png"))
}

fn save_view(view: &CoarseView, out: &Path, mask_out: Option<&Path>) -> Res<()> {
    save_image(&view.rgb, out)?;
    if let Some(m) = mask_out {
        save_image(&view.coverage_image(), m)?;
    }
    Ok(())
}

fn view_summary(view: &CoarseView) -> serde_json::Value {
    json!({
        "width": view.width(),
        "height": view.height(),
        "covered": view.coverage.count(),
        "coverage": view.coverage_ratio(),
    })
}

fn ply_format(binary: bool) -> PlyFormat {
    if binary {
        PlyFormat::BinaryLittleEndian
    } else {
        PlyFormat::Ascii
    }
}

fn report(json_mode: bool, summary: serde_json::Value, text: String) {
    if json_mode {
        println!("{summary}");
    } else {
        println!("{text}");
    }
}

#[derive(Serialize)]
struct MetricsReport {
    l1: f64,
    ssim: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    masked_l1: Option<f64>,
}

fn run(cli: Cli) -> Res<()> {
    match cli.command {
        Command::Backproject(a) => {
            let cfg = config(&a.common)?;
            let k = intrinsics(a.source.k.as_deref(), &cfg)?;
            let cloud = backproject(&load_depth(&a.source.depth)?, &k, &load_image(&a.source.input)?)?;
            save_ply(&cloud, &a.out, ply_format(a.binary))?;
            report(
                a.common.json,
                json!({ "points": cloud.len() }),
                format!("wrote {} points to {}", cloud.len(), a.out.display()),
            );
        }
        Command::WarpForward(a) => {
            let cfg = config(&a.common)?;
            let k = intrinsics(a.source.k.as_deref(), &cfg)?;
            let (theta, _) = relative(a.pose.as_deref(), &cfg)?;
            let view = forward_warp(&load_image(&a.source.input)?, &load_depth(&a.source.depth)?, &k, &theta)?;
            save_view(&view, &a.out, a.mask_out.as_deref())?;
            report(
                a.common.json,
                view_summary(&view),
                format!("coverage {:.4}", view.coverage_ratio()),
            );
        }
        Command::WarpBackward(a) => {
            let cfg = config(&a.common)?;
            let k = intrinsics(a.k.as_deref(), &cfg)?;
            let (theta, _) = relative(a.pose.as_deref(), &cfg)?;
            let warped = backward_warp(&load_image(&a.target)?, &load_depth(&a.depth)?, &k, &theta)?;
            save_image(&warped.image, &a.out)?;
            if let Some(m) = &a.mask_out {
                save_image(&mask_image(&warped.mask), m)?;
            }
            let valid = warped.mask.count();
            report(
                a.common.json,
                json!({ "width": k.width, "height": k.height, "valid": valid }),
                format!("{valid} of {} pixels sampled inside the target", k.width * k.height),
            );
        }
        Command::Coarse(a) => {
            let mut cfg = config(&a.common)?;
            apply_coarse_flags(&mut cfg, &a.opts);
            cfg.validate()?;
            let k = intrinsics(a.source.k.as_deref(), &cfg)?;
            let (theta, source) = relative(a.pose.as_deref(), &cfg)?;
            let opts = cfg.coarse_options(source.as_ref())?;
            let view = coarse_view(
                &load_image(&a.source.input)?,
                &load_depth(&a.source.depth)?,
                &k,
                &theta,
                &opts,
            )?;
            let mask_out = a.mask_out.clone().unwrap_or_else(|| default_mask_path(&a.out));
            save_view(&view, &a.out, Some(&mask_out))?;
            report(
                a.common.json,
                view_summary(&view),
                format!(
                    "coverage {:.4}; mask written to {}",
                    view.coverage_ratio(),
                    mask_out.display()
                ),
            );
        }
        Command::Metrics(a) => {
            let cfg = config(&a.common)?;
            let (x, y) = (load_image(&a.a)?, load_image(&a.b)?);
            let (xf, yf) = (x.to_f64(), y.to_f64());
            let masked = match &a.mask {
                Some(p) => {
                    let m = load_image(p)?;
                    if m.dims() != x.dims() {
                        return Err(Error::InvalidInput("mask size differs from the images".into()));
                    }
                    let bits: Vec<bool> = m.data().chunks_exact(3).map(|px| px[0] >= 0.5).collect();
                    masked_l1(&xf, &yf, &bits)?
                }
                None => None,
            };
            let r = MetricsReport {
                l1: l1_metric(&xf, &yf)?,
                ssim: ssim(&xf, &yf, &cfg.ssim)?.mean,
                masked_l1: masked,
            };
            let summary = serde_json::to_value(&r).expect("plain numbers serialize");
            report(a.common.json, summary, format!("l1 {:.6}  ssim {:.6}", r.l1, r.ssim));
        }
        Command::Fuse(a) => {
            let mut cfg = config(&a.common)?;
            apply_coarse_flags(&mut cfg, &a.opts);
            cfg.validate()?;
            let views = load_views(&a.views)?;
            let cloud = fuse_clouds(&views, a.reference)?;
            save_ply(&cloud, &a.out, ply_format(a.binary))?;
            let mut summary = json!({ "views": views.len(), "points": cloud.len() });
            if let Some(target) = &a.target {
                let target: PoseSpec = load_json(target)?;
                let reference = &views[a.reference];
                let reference_w2c = reference.extrinsic();
                let theta = target.world_to_camera()?.compose(&reference.camera_to_world);
                // a symmetry plane given in world terms is placed via the reference camera
                let opts = cfg.coarse_options(Some(&reference_w2c))?;
                let view = coarse_from_fused(&cloud, &reference.intrinsics, &theta, &opts)?;
                if let Some(out) = &a.coarse_out {
                    save_view(&view, out, Some(&default_mask_path(out)))?;
                }
                summary["coarse"] = view_summary(&view);
            }
            report(
                a.common.json,
                summary,
                format!("fused {} views into {} points", views.len(), cloud.len()),
            );
        }
        Command::Recon360(a) => {
            let mut cfg = config(&a.common)?;
            cfg.prune |= a.prune;
            if let Some(s) = a.sigmas {
                cfg.prune_sigmas = s;
            }
            cfg.validate()?;
            let views = load_views(&a.views)?;
            let cloud = reconstruct_360(&views, &cfg.reconstruct_options())?;
            save_ply(&cloud, &a.out, ply_format(a.binary))?;
            let (lo, hi) = cloud
                .bounds()
                .map(|(lo, hi)| ([lo.x, lo.y, lo.z], [hi.x, hi.y, hi.z]))
                .unwrap_or_default();
            report(
                a.common.json,
                json!({ "views": views.len(), "points": cloud.len(), "min": lo, "max": hi }),
                format!("reconstructed {} points from {} views", cloud.len(), views.len()),
            );
        }
        Command::Render(a) => {
            let cfg = config(&a.common)?;
            let k = intrinsics(a.k.as_deref(), &cfg)?;
            let scene: SceneSpec = load_json(&a.scene)?;
            let pose = match (&a.orbit, &a.pose) {
                (Some(o), _) => o.extrinsic()?,
                (None, Some(p)) => load_json::<PoseSpec>(p)?.world_to_camera()?,
                (None, None) => return Err(Error::InvalidInput("render needs --orbit or --pose".into())),
            };
            let r = render(&scene, &k, &pose)?;
            save_image(&r.image, &a.out)?;
            if let Some(d) = &a.depth_out {
                save_depth(&r.depth, d)?;
            }
            let fg = r.depth.valid_count();
            if let Some(m) = &a.mask_out {
                let mask = Mask::from_vec(k.width, k.height, r.depth.values().iter().map(|&d| d > 0.0).collect())?;
                save_image(&mask_image(&mask), m)?;
            }
            report(
                a.common.json,
                json!({ "width": k.width, "height": k.height, "foreground": fg }),
                format!("rendered {}x{} ({} foreground pixels)", k.width, k.height, fg),
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
        Err(_) => ExitCode::from(2),
    }
}
