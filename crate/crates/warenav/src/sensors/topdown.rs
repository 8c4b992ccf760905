//! Top-down map renderer: the fixed bird's-eye view with obstacle
//! footprints, entity discs, the agent as a red triangle whose apex points
//! along the heading, and the target as a green dot.

use crate::dynamics::{AgentPose, WorldState};
use crate::sensors::image::Image;
use crate::world::{EntityKind, ObstacleKind, SceneConfig};

const BACKGROUND: [u8; 3] = [235, 235, 238];
const AGENT_RED: [u8; 3] = [220, 40, 40];
const TARGET_GREEN: [u8; 3] = [40, 180, 70];

fn obstacle_color(kind: ObstacleKind, color_id: u8) -> [u8; 3] {
    let base: [u8; 3] = match kind {
        ObstacleKind::Wall => [70, 72, 78],
        ObstacleKind::Shelf => [205, 112, 30],
        ObstacleKind::Container => [48, 98, 170],
        ObstacleKind::Barrel => [170, 56, 44],
        ObstacleKind::Misc => [120, 130, 138],
    };
    let f = 0.86 + 0.045 * f64::from(color_id % 4);
    base.map(|c| ((f64::from(c) * f).round() as i64).clamp(0, 255) as u8)
}

fn entity_color(kind: EntityKind) -> [u8; 3] {
    match kind {
        EntityKind::Worker => [235, 190, 50],
        EntityKind::Forklift => [235, 130, 35],
        EntityKind::Robot => [80, 190, 210],
    }
}

/// Vertices of the agent marker: apex one `size` ahead of the center along
/// the heading, base corners behind it.
pub fn agent_triangle(pose: &AgentPose, size: f64) -> [(f64, f64); 3] {
    let (dx, dy) = pose.theta.unit();
    let (dx, dy) = (dx as f64, dy as f64);
    // Perpendicular to the heading.
    let (px, py) = (-dy, dx);
    let cx = pose.x as f64;
    let cy = pose.y as f64;
    let apex = (cx + dx * size, cy + dy * size);
    let base_l = (cx - dx * size * 0.7 + px * size * 0.6, cy - dy * size * 0.7 + py * size * 0.6);
    let base_r = (cx - dx * size * 0.7 - px * size * 0.6, cy - dy * size * 0.7 - py * size * 0.6);
    [apex, base_l, base_r]
}

/// Render the scene from above at map resolution.
pub fn render_topdown(state: &WorldState, scene: &SceneConfig) -> Image {
    let mut img = Image::filled(scene.map.width, scene.map.height, BACKGROUND);
    for ob in &scene.obstacles {
        let r = ob.footprint;
        img.fill_rect(r.x, r.y, r.w, r.h, obstacle_color(ob.kind, ob.color_id));
    }
    for (en, (center, radius)) in scene
        .entities
        .iter()
        .zip(scene.entity_discs(&state.entity_phases))
    {
        img.fill_disc(center.x, center.y, radius, entity_color(en.kind));
    }
    img.fill_disc(
        state.target.x as f64,
        state.target.y as f64,
        6.0,
        TARGET_GREEN,
    );
    img.fill_triangle(agent_triangle(&state.pose, 14.0), AGENT_RED);
    img
}
