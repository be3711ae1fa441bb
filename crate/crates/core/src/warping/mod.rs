//! Forward and backward warping between views, occlusion removal and
//! symmetry completion of the coarse target view.

mod backward;
mod bilinear;
mod coarse;
mod cull;
mod forward;
mod normals;
mod symmetry;

pub use backward::{backward_warp, BackwardWarp};
pub use bilinear::{bilinear_sample, bilinear_sample_into, footprint_overlaps};
pub use coarse::{coarse_view, render_cloud, CoarseOptions, Symmetry};
pub use cull::{backface_cull, backface_flags, backface_mask, cull_oriented};
pub use forward::{forward_warp, splat, CoarseView};
pub use normals::{attach_normals, estimate_normals, NormalMap};
pub use symmetry::{symmetrize, SymmetryPlane, DEFAULT_MERGE_RADIUS};
