//! Sensing: exact ray-cast depth, the forward-ROI warning detector, a 2.5D
//! egocentric renderer, and the top-down map renderer.
//!
//! Everything here is a pure function of `(WorldState, SceneConfig)` and is
//! safe to call concurrently.

mod depth;
mod ego;
mod image;
mod topdown;

pub use depth::{cast_depth, cast_rays, detect_warning, DepthProfile, DepthRay, HitKind, WarningConfig};
pub use ego::{projected_slab_height, render_ego, EgoRenderConfig};
pub use image::Image;
pub use topdown::{agent_triangle, render_topdown};
