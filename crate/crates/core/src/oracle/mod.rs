//! Analytic scene oracle: ray-traced renders with exact depth, normals and
//! correspondences, used as ground truth in place of learned depth.

mod render;
mod scene;

pub use render::{analytic_flow, render, trace, trace_ray, Hit, Rendering};
pub use scene::{scenes, Checker, Extent, Primitive, SceneSpec, Shape};
