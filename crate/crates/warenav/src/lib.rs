//! Deterministic 2D warehouse navigation simulator and zero-shot agent
//! evaluation harness.
//!
//! The crate is organized around the episode loop:
//! [`world`] describes, validates, and generates scenes; [`dynamics`]
//! steps the agent and dynamic entities; [`sensors`] produces exact
//! ray-cast depth, egocentric and top-down rasters, and the warning
//! detector; [`protocol`] builds prompts, parses model decisions, and
//! hosts the scripted policies; [`metrics`] scores finished runs;
//! [`episodes`] ties the loop together with JSONL logging, replay, and
//! batched benchmarking.

pub mod dynamics;
pub mod episodes;
pub mod geom;
pub mod metrics;
pub mod planner;
pub mod protocol;
pub mod sensors;
pub mod world;

/// Forward step length in pixels. One step is one meter at the default map
/// scale.
pub const STEP_PX: i32 = 34;

/// Default agent body disc radius in pixels (about 0.3 m at default scale).
pub const DEFAULT_AGENT_RADIUS_PX: f64 = 10.0;

/// Default success threshold: a run succeeds when the final distance to
/// the target is at most this many pixels.
pub const DEFAULT_SUCCESS_RADIUS_PX: f64 = 20.0;

/// Default per-run step budget.
pub const DEFAULT_MAX_STEPS: u32 = 70;

/// Default action-state history window length.
pub const DEFAULT_HISTORY_LEN: usize = 10;
