//! Scene data model: static obstacles, dynamic entities on waypoint loops,
//! start-target pairs, validation, and occupancy-grid extraction.
//!
//! Scenes are value types and immutable once built, so they can be shared
//! freely across concurrent episode runners.

mod format;
mod generate;
mod grid;

pub use format::{parse_scene, serialize_scene, ParseError};
pub use generate::{generate_scene, GenerateError, GeneratorParams};
pub use grid::{occupancy_grid, OccupancyGrid};

use serde::{Deserialize, Serialize};

use crate::dynamics::Heading;
use crate::geom::{Rectf, Vec2};
use crate::DEFAULT_SUCCESS_RADIUS_PX;

/// Integer pixel point. Serialized as a two-element array `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct PxPoint {
    pub x: i32,
    pub y: i32,
}

impl PxPoint {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn to_vec2(self) -> Vec2 {
        Vec2::new(self.x as f64, self.y as f64)
    }

    pub fn dist(self, o: PxPoint) -> f64 {
        self.to_vec2().dist(o.to_vec2())
    }
}

impl From<[i32; 2]> for PxPoint {
    fn from(v: [i32; 2]) -> Self {
        Self { x: v[0], y: v[1] }
    }
}

impl From<PxPoint> for [i32; 2] {
    fn from(p: PxPoint) -> Self {
        [p.x, p.y]
    }
}

/// Integer pixel rectangle. Serialized as `[x, y, w, h]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i32; 4]", into = "[i32; 4]")]
pub struct PxRect {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
}

impl PxRect {
    pub const fn new(x: i32, y: i32, w: i32, h: i32) -> Self {
        Self { x, y, w, h }
    }

    pub fn to_rectf(self) -> Rectf {
        Rectf::from_xywh(self.x as f64, self.y as f64, self.w as f64, self.h as f64)
    }

    pub fn contains_point(self, p: PxPoint) -> bool {
        p.x >= self.x && p.x <= self.x + self.w && p.y >= self.y && p.y <= self.y + self.h
    }
}

impl From<[i32; 4]> for PxRect {
    fn from(v: [i32; 4]) -> Self {
        Self {
            x: v[0],
            y: v[1],
            w: v[2],
            h: v[3],
        }
    }
}

impl From<PxRect> for [i32; 4] {
    fn from(r: PxRect) -> Self {
        [r.x, r.y, r.w, r.h]
    }
}

/// Map extent and physical scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub width: u32,
    pub height: u32,
    /// Physical scale; the default makes one forward step (34 px) one meter.
    pub meters_per_pixel: f64,
}

impl Default for MapSpec {
    fn default() -> Self {
        Self {
            width: 1024,
            height: 512,
            meters_per_pixel: 1.0 / 34.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    Wall,
    Shelf,
    Container,
    Barrel,
    Misc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightClass {
    Low,
    Tall,
}

/// Static axis-aligned obstacle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub id: String,
    pub kind: ObstacleKind,
    pub height_class: HeightClass,
    /// Render palette index; shades the base color for its kind.
    pub color_id: u8,
    pub footprint: PxRect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Worker,
    Forklift,
    Robot,
}

/// Moving obstacle: a disc that follows a closed waypoint polyline at a
/// fixed speed, advancing once per simulation tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicEntity {
    pub id: String,
    pub kind: EntityKind,
    /// Body disc radius in px.
    pub radius: f64,
    /// Advance per simulation tick, in px along the loop.
    pub speed: f64,
    /// Current position along the looped polyline, in `[0, path_length)`.
    pub phase: f64,
    pub waypoints: Vec<PxPoint>,
}

impl DynamicEntity {
    /// Perimeter of the closed polyline (includes the segment back to the
    /// first waypoint).
    pub fn path_length(&self) -> f64 {
        let n = self.waypoints.len();
        if n < 2 {
            return 0.0;
        }
        (0..n)
            .map(|i| self.waypoints[i].dist(self.waypoints[(i + 1) % n]))
            .sum()
    }

    /// Position at a given phase, interpolated linearly along the loop.
    pub fn position_at(&self, phase: f64) -> Vec2 {
        let n = self.waypoints.len();
        if n == 0 {
            return Vec2::new(0.0, 0.0);
        }
        if n == 1 {
            return self.waypoints[0].to_vec2();
        }
        let total = self.path_length();
        if total <= 0.0 {
            return self.waypoints[0].to_vec2();
        }
        let mut remaining = phase.rem_euclid(total);
        for i in 0..n {
            let a = self.waypoints[i].to_vec2();
            let b = self.waypoints[(i + 1) % n].to_vec2();
            let seg = a.dist(b);
            if remaining <= seg {
                if seg == 0.0 {
                    return a;
                }
                return a.add(b.sub(a).scale(remaining / seg));
            }
            remaining -= seg;
        }
        self.waypoints[0].to_vec2()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

/// One evaluation run: where the agent spawns and where it must go.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartTargetPair {
    pub start: PxPoint,
    pub start_theta: Heading,
    pub target: PxPoint,
    pub difficulty: Difficulty,
}

/// A complete scene: map, static obstacles, dynamic entities, and runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub map: MapSpec,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub entities: Vec<DynamicEntity>,
    #[serde(default)]
    pub pairs: Vec<StartTargetPair>,
}

impl SceneConfig {
    /// Static obstacle footprints as float rectangles.
    pub fn obstacle_rects(&self) -> Vec<Rectf> {
        self.obstacles.iter().map(|o| o.footprint.to_rectf()).collect()
    }

    /// Entity discs (center, radius) at the given per-entity phases.
    pub fn entity_discs(&self, phases: &[f64]) -> Vec<(Vec2, f64)> {
        debug_assert_eq!(phases.len(), self.entities.len());
        self.entities
            .iter()
            .zip(phases)
            .map(|(e, &p)| (e.position_at(p), e.radius))
            .collect()
    }

    /// Per-entity phases as stored in the config.
    pub fn initial_phases(&self) -> Vec<f64> {
        self.entities.iter().map(|e| e.phase).collect()
    }

    pub fn in_bounds(&self, p: PxPoint) -> bool {
        p.x >= 0 && p.y >= 0 && p.x <= self.map.width as i32 && p.y <= self.map.height as i32
    }

    /// Canonical form: obstacles and entities ordered by id. Pairs keep
    /// their authored order (it is meaningful: index selects the run).
    pub fn canonicalize(&self) -> SceneConfig {
        let mut cfg = self.clone();
        cfg.obstacles.sort_by(|a, b| a.id.cmp(&b.id));
        cfg.entities.sort_by(|a, b| a.id.cmp(&b.id));
        cfg
    }
}

/// Rule identifier for a validation violation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationRule {
    MapDimensions,
    FootprintEmpty,
    FootprintOutOfBounds,
    TooFewWaypoints,
    WaypointOutOfBounds,
    WaypointInsideObstacle,
    NegativeSpeed,
    PhaseOutOfRange,
    DegeneratePath,
    StartInsideObstacle,
    TargetInsideObstacle,
    PairTooClose,
    PairUnreachable,
}

/// A broken invariant, naming the offending entity and rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub subject: String,
    pub rule: ViolationRule,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {} [{:?}]", self.subject, self.message, self.rule)
    }
}

fn violation(subject: impl Into<String>, rule: ViolationRule, msg: impl Into<String>) -> Violation {
    Violation {
        subject: subject.into(),
        rule,
        message: msg.into(),
    }
}

/// Check every scene invariant, including static reachability of each pair
/// over the occupancy grid. Returns an empty list for a valid scene.
pub fn validate_scene(cfg: &SceneConfig) -> Vec<Violation> {
    let mut out = Vec::new();

    if cfg.map.width == 0 || cfg.map.height == 0 || cfg.map.meters_per_pixel <= 0.0 {
        out.push(violation(
            "map",
            ViolationRule::MapDimensions,
            format!(
                "invalid dimensions {}x{} at {} m/px",
                cfg.map.width, cfg.map.height, cfg.map.meters_per_pixel
            ),
        ));
        return out;
    }

    for ob in &cfg.obstacles {
        let r = ob.footprint;
        if r.w <= 0 || r.h <= 0 {
            out.push(violation(
                &ob.id,
                ViolationRule::FootprintEmpty,
                format!("footprint {}x{} has no area", r.w, r.h),
            ));
        }
        if r.x < 0
            || r.y < 0
            || r.x + r.w > cfg.map.width as i32
            || r.y + r.h > cfg.map.height as i32
        {
            out.push(violation(
                &ob.id,
                ViolationRule::FootprintOutOfBounds,
                "footprint extends outside the map",
            ));
        }
    }

    for en in &cfg.entities {
        if en.waypoints.len() < 2 {
            out.push(violation(
                &en.id,
                ViolationRule::TooFewWaypoints,
                format!("{} waypoint(s); at least 2 required", en.waypoints.len()),
            ));
            continue;
        }
        for (i, wp) in en.waypoints.iter().enumerate() {
            if !cfg.in_bounds(*wp) {
                out.push(violation(
                    &en.id,
                    ViolationRule::WaypointOutOfBounds,
                    format!("waypoint {i} at ({}, {}) out of bounds", wp.x, wp.y),
                ));
            }
            for ob in &cfg.obstacles {
                if ob.footprint.contains_point(*wp) {
                    out.push(violation(
                        &en.id,
                        ViolationRule::WaypointInsideObstacle,
                        format!("waypoint {i} lies inside obstacle {}", ob.id),
                    ));
                }
            }
        }
        if en.speed < 0.0 {
            out.push(violation(
                &en.id,
                ViolationRule::NegativeSpeed,
                format!("speed {} is negative", en.speed),
            ));
        }
        let len = en.path_length();
        if len <= 0.0 {
            out.push(violation(
                &en.id,
                ViolationRule::DegeneratePath,
                "waypoint loop has zero length",
            ));
        } else if en.phase < 0.0 || en.phase >= len {
            out.push(violation(
                &en.id,
                ViolationRule::PhaseOutOfRange,
                format!("phase {} outside [0, {len})", en.phase),
            ));
        }
    }

    // Pair checks use the default agent footprint for grid inflation.
    let grid = occupancy_grid(cfg, 34, crate::DEFAULT_AGENT_RADIUS_PX);
    for (i, pair) in cfg.pairs.iter().enumerate() {
        let subject = format!("pairs[{i}]");
        for (label, p, rule) in [
            ("start", pair.start, ViolationRule::StartInsideObstacle),
            ("target", pair.target, ViolationRule::TargetInsideObstacle),
        ] {
            if !cfg.in_bounds(p) {
                out.push(violation(
                    &subject,
                    rule,
                    format!("{label} at ({}, {}) out of bounds", p.x, p.y),
                ));
                continue;
            }
            for ob in &cfg.obstacles {
                if ob.footprint.contains_point(p) {
                    out.push(violation(
                        &subject,
                        rule,
                        format!("{label} lies inside obstacle {}", ob.id),
                    ));
                }
            }
        }
        let d = pair.start.dist(pair.target);
        if d <= DEFAULT_SUCCESS_RADIUS_PX {
            out.push(violation(
                &subject,
                ViolationRule::PairTooClose,
                format!("start-target distance {d:.1} px does not exceed the success threshold"),
            ));
        }
        if cfg.in_bounds(pair.start)
            && cfg.in_bounds(pair.target)
            && !grid.path_exists(pair.start, pair.target)
        {
            out.push(violation(
                &subject,
                ViolationRule::PairUnreachable,
                "no collision-free grid path from start to target in the static scene",
            ));
        }
    }

    out
}
