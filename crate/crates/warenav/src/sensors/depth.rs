//! Exact geometric depth casting and the forward-ROI warning detector.
//!
//! Depth comes from analytic ray intersections against the scene geometry
//! (static rectangles, entity discs at their current phases, and the map
//! boundary), so warning detection is exactly testable instead of relying
//! on an estimated depth map.

use crate::dynamics::WorldState;
use crate::geom::{ray_box_exit, ray_circle, ray_rect, Rectf, Vec2};
use crate::world::SceneConfig;

/// What a ray hit first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HitKind {
    Static,
    Entity,
    Boundary,
    None,
}

/// One ray of a depth profile. `angle_deg` is the offset from the agent
/// heading; positive offsets rotate the same way as a right turn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthRay {
    pub angle_deg: f64,
    /// Distance in px to the first hit; infinite when `hit` is `None`.
    pub distance: f64,
    pub hit: HitKind,
    /// Index of the hit obstacle or entity, for rendering.
    pub hit_index: Option<usize>,
}

/// A fan of rays, angles strictly increasing and symmetric about 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthProfile {
    pub fov_deg: f64,
    pub rays: Vec<DepthRay>,
}

impl DepthProfile {
    /// Minimum hit distance over rays within `half_angle_deg` of the
    /// heading and within `range_limit_px`. `None` when nothing hits.
    pub fn min_in_cone(&self, half_angle_deg: f64, range_limit_px: f64) -> Option<f64> {
        self.rays
            .iter()
            .filter(|r| {
                r.angle_deg.abs() <= half_angle_deg
                    && r.hit != HitKind::None
                    && r.distance <= range_limit_px
            })
            .map(|r| r.distance)
            .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.min(d))))
    }
}

/// Heading direction in map coordinates for an angle in degrees, exact for
/// the cardinals.
pub(crate) fn heading_unit(theta_deg: f64) -> Vec2 {
    match theta_deg {
        d if d == 0.0 => Vec2::new(-1.0, 0.0),
        d if d == 90.0 => Vec2::new(0.0, -1.0),
        d if d == 180.0 => Vec2::new(1.0, 0.0),
        d if d == 270.0 => Vec2::new(0.0, 1.0),
        d => {
            let r = d.to_radians();
            Vec2::new(-r.cos(), -r.sin())
        }
    }
}

/// Rotate `v` by an angle whose cosine/sine are given, in the same
/// rotational sense as a right turn (90° maps West to North).
fn rotate(v: Vec2, cos_a: f64, sin_a: f64) -> Vec2 {
    Vec2::new(v.x * cos_a - v.y * sin_a, v.y * cos_a + v.x * sin_a)
}

fn trace(
    origin: Vec2,
    dir: Vec2,
    angle_deg: f64,
    rects: &[Rectf],
    discs: &[(Vec2, f64)],
    bounds: Option<(f64, f64)>,
) -> DepthRay {
    let mut best = f64::INFINITY;
    let mut hit = HitKind::None;
    let mut hit_index = None;
    for (i, r) in rects.iter().enumerate() {
        if let Some(t) = ray_rect(origin, dir, *r) {
            if t < best {
                best = t;
                hit = HitKind::Static;
                hit_index = Some(i);
            }
        }
    }
    for (i, (c, cr)) in discs.iter().enumerate() {
        if let Some(t) = ray_circle(origin, dir, *c, *cr) {
            if t < best {
                best = t;
                hit = HitKind::Entity;
                hit_index = Some(i);
            }
        }
    }
    if let Some((w, h)) = bounds {
        let t = ray_box_exit(origin, dir, w, h);
        if t < best {
            best = t;
            hit = HitKind::Boundary;
            hit_index = None;
        }
    }
    DepthRay {
        angle_deg,
        distance: best,
        hit,
        hit_index,
    }
}

/// Cast `n_rays` across `fov_deg` centered on `heading_deg`. The fan is
/// built pairwise (one trig evaluation per |offset|), so rays at +a and -a
/// have exactly mirrored directions.
pub fn cast_rays(
    origin: Vec2,
    heading_deg: f64,
    fov_deg: f64,
    n_rays: usize,
    rects: &[Rectf],
    discs: &[(Vec2, f64)],
    bounds: Option<(f64, f64)>,
) -> DepthProfile {
    assert!(n_rays >= 1, "need at least one ray");
    assert!(fov_deg > 0.0 && fov_deg <= 180.0, "fov must be in (0, 180]");
    let h = heading_unit(heading_deg);
    let mut rays = vec![
        DepthRay {
            angle_deg: 0.0,
            distance: f64::INFINITY,
            hit: HitKind::None,
            hit_index: None,
        };
        n_rays
    ];
    if n_rays == 1 {
        rays[0] = trace(origin, h, 0.0, rects, discs, bounds);
        return DepthProfile {
            fov_deg,
            rays,
        };
    }
    let step = fov_deg / (n_rays - 1) as f64;
    let mid = (n_rays - 1) / 2;
    for i in 0..=mid {
        let k = (n_rays - 1) as f64 / 2.0 - i as f64;
        let off = k * step;
        let (sin_a, cos_a) = off.to_radians().sin_cos();
        // Ray i sits at -off, its mirror partner at +off.
        rays[i] = trace(origin, rotate(h, cos_a, -sin_a), -off, rects, discs, bounds);
        rays[n_rays - 1 - i] = trace(origin, rotate(h, cos_a, sin_a), off, rects, discs, bounds);
    }
    DepthProfile { fov_deg, rays }
}

/// Exact depth for the agent's current pose against the full scene.
pub fn cast_depth(
    state: &WorldState,
    scene: &SceneConfig,
    fov_deg: f64,
    n_rays: usize,
) -> DepthProfile {
    cast_rays(
        state.pose.position().to_vec2(),
        state.pose.theta.degrees() as f64,
        fov_deg,
        n_rays,
        &scene.obstacle_rects(),
        &scene.entity_discs(&state.entity_phases),
        Some((scene.map.width as f64, scene.map.height as f64)),
    )
}

/// Warning detector configuration.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WarningConfig {
    /// A hit closer than this (in meters) inside the ROI raises a warning.
    pub threshold_m: f64,
    /// Angular half-width of the forward region of interest.
    pub roi_half_angle_deg: f64,
    /// Hits beyond this range are ignored (five steps by default).
    pub roi_range_limit_px: f64,
}

impl Default for WarningConfig {
    fn default() -> Self {
        Self {
            threshold_m: 1.0,
            roi_half_angle_deg: 15.0,
            roi_range_limit_px: 170.0,
        }
    }
}

/// True when the minimum depth inside the forward ROI falls below the
/// threshold. `scale` converts px to meters.
pub fn detect_warning(profile: &DepthProfile, cfg: &WarningConfig, scale: f64) -> bool {
    debug_assert!(!profile.rays.is_empty(), "empty depth profile");
    match profile.min_in_cone(cfg.roi_half_angle_deg, cfg.roi_range_limit_px) {
        Some(d) => d * scale < cfg.threshold_m,
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{AgentPose, Heading};
    use crate::world::{HeightClass, MapSpec, Obstacle, ObstacleKind, PxPoint, PxRect};

    fn scene_with(obstacles: Vec<Obstacle>) -> SceneConfig {
        SceneConfig {
            name: "t".into(),
            seed: None,
            map: MapSpec::default(),
            obstacles,
            entities: vec![],
            pairs: vec![],
        }
    }

    fn state_at(x: i32, y: i32, theta: Heading) -> WorldState {
        WorldState {
            pose: AgentPose {
                x,
                y,
                theta,
                radius: 10.0,
            },
            entity_phases: vec![],
            tick: 0,
            target: PxPoint::new(0, 0),
        }
    }

    fn wall(x: i32, y: i32, w: i32, h: i32) -> Obstacle {
        Obstacle {
            id: "w".into(),
            kind: ObstacleKind::Wall,
            height_class: HeightClass::Tall,
            color_id: 0,
            footprint: PxRect::new(x, y, w, h),
        }
    }

    #[test]
    fn perpendicular_wall_hit_is_exact() {
        let scene = scene_with(vec![wall(400, 0, 20, 512)]);
        let state = state_at(300, 256, Heading::East);
        let profile = cast_depth(&state, &scene, 90.0, 5);
        let center = &profile.rays[2];
        assert_eq!(center.angle_deg, 0.0);
        assert_eq!(center.distance, 100.0);
        assert_eq!(center.hit, HitKind::Static);
    }

    #[test]
    fn unbounded_fixture_reports_no_hits() {
        let profile = cast_rays(
            Vec2::new(0.0, 0.0),
            180.0,
            90.0,
            7,
            &[],
            &[],
            None,
        );
        assert!(profile.rays.iter().all(|r| r.hit == HitKind::None));
        assert!(profile.rays.iter().all(|r| r.distance.is_infinite()));
    }

    #[test]
    fn angles_increasing_and_symmetric() {
        let scene = scene_with(vec![]);
        let profile = cast_depth(&state_at(500, 256, Heading::East), &scene, 90.0, 10);
        for pair in profile.rays.windows(2) {
            assert!(pair[0].angle_deg < pair[1].angle_deg);
        }
        for i in 0..profile.rays.len() {
            let j = profile.rays.len() - 1 - i;
            assert_eq!(profile.rays[i].angle_deg, -profile.rays[j].angle_deg);
        }
    }

    #[test]
    fn warning_thresholds() {
        let scale = 1.0 / 34.0;
        let cfg = WarningConfig::default();
        // Wall 0.5 m (17 px) dead ahead.
        let scene = scene_with(vec![wall(317, 0, 20, 512)]);
        let profile = cast_depth(&state_at(300, 256, Heading::East), &scene, 90.0, 61);
        assert!(detect_warning(&profile, &cfg, scale));
        // Wall 2.0 m (68 px) ahead.
        let scene = scene_with(vec![wall(368, 0, 20, 512)]);
        let profile = cast_depth(&state_at(300, 256, Heading::East), &scene, 90.0, 61);
        assert!(!detect_warning(&profile, &cfg, scale));
    }

    #[test]
    fn obstacle_outside_roi_does_not_warn() {
        let scale = 1.0 / 34.0;
        let cfg = WarningConfig::default();
        // Small block 17 px away but roughly 40 degrees off-axis.
        let scene = scene_with(vec![wall(310, 266, 10, 10)]);
        let profile = cast_depth(&state_at(300, 256, Heading::East), &scene, 120.0, 121);
        let off_axis = profile
            .rays
            .iter()
            .filter(|r| r.angle_deg.abs() > cfg.roi_half_angle_deg)
            .any(|r| r.hit == HitKind::Static && r.distance * scale < cfg.threshold_m);
        assert!(off_axis, "fixture should be visible outside the ROI");
        assert!(!detect_warning(&profile, &cfg, scale));
    }

    #[test]
    fn occlusion_is_monotone() {
        let base = scene_with(vec![wall(500, 0, 20, 512)]);
        let mut denser = base.clone();
        denser.obstacles.push(wall(400, 200, 30, 120));
        let state = state_at(200, 256, Heading::East);
        let a = cast_depth(&state, &base, 90.0, 61);
        let b = cast_depth(&state, &denser, 90.0, 61);
        for (ra, rb) in a.rays.iter().zip(&b.rays) {
            assert!(rb.distance <= ra.distance);
        }
    }

    #[test]
    fn mirrored_scene_mirrors_profile_exactly() {
        // Agent on the horizontal mirror axis (y = 256), heading East.
        let cy = 256.0;
        let rects = vec![
            Rectf::from_xywh(400.0, 100.0, 40.0, 60.0),
            Rectf::from_xywh(350.0, 300.0, 80.0, 30.0),
        ];
        let mirrored: Vec<Rectf> = rects
            .iter()
            .map(|r| {
                Rectf {
                    min_x: r.min_x,
                    min_y: 2.0 * cy - r.max_y,
                    max_x: r.max_x,
                    max_y: 2.0 * cy - r.min_y,
                }
            })
            .collect();
        let discs = vec![(Vec2::new(500.0, 180.0), 12.0)];
        let discs_m: Vec<(Vec2, f64)> = discs
            .iter()
            .map(|(c, r)| (Vec2::new(c.x, 2.0 * cy - c.y), *r))
            .collect();
        let origin = Vec2::new(200.0, cy);
        let a = cast_rays(origin, 180.0, 90.0, 33, &rects, &discs, Some((1024.0, 512.0)));
        let b = cast_rays(origin, 180.0, 90.0, 33, &mirrored, &discs_m, Some((1024.0, 512.0)));
        for i in 0..a.rays.len() {
            let j = a.rays.len() - 1 - i;
            assert_eq!(a.rays[i].distance, b.rays[j].distance, "ray {i}");
            assert_eq!(a.rays[i].hit, b.rays[j].hit);
        }
    }

    #[test]
    fn warning_monotone_in_threshold() {
        let scale = 1.0 / 34.0;
        let scene = scene_with(vec![wall(340, 200, 20, 112)]);
        let profile = cast_depth(&state_at(300, 256, Heading::East), &scene, 90.0, 61);
        let mut prev = false;
        for t in [0.2, 0.5, 1.0, 2.0, 4.0] {
            let cfg = WarningConfig {
                threshold_m: t,
                ..WarningConfig::default()
            };
            let w = detect_warning(&profile, &cfg, scale);
            assert!(!prev || w, "warning flipped off as threshold grew");
            prev = w;
        }
    }
}
