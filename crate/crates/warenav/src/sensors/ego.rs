//! 2.5D egocentric renderer: one depth ray per image column, each drawing a
//! vertical slab whose height is inversely proportional to perpendicular
//! hit distance (perpendicular, not radial, to avoid fisheye bowing).

use crate::dynamics::WorldState;
use crate::sensors::depth::{cast_rays, HitKind};
use crate::sensors::image::Image;
use crate::world::{EntityKind, HeightClass, ObstacleKind, SceneConfig};

/// Egocentric camera configuration.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EgoRenderConfig {
    pub width: u32,
    pub height: u32,
    pub fov_deg: f64,
}

impl Default for EgoRenderConfig {
    fn default() -> Self {
        Self {
            width: 1024,
            height: 1024,
            fov_deg: 90.0,
        }
    }
}

const CEILING: [u8; 3] = [188, 192, 198];
const FLOOR: [u8; 3] = [108, 110, 114];
const BOUNDARY_WALL: [u8; 3] = [92, 94, 100];

/// Apparent wall heights in px of world space, by obstacle class.
fn static_height(class: HeightClass) -> f64 {
    match class {
        HeightClass::Tall => 68.0,
        HeightClass::Low => 34.0,
    }
}

fn entity_height(kind: EntityKind) -> f64 {
    match kind {
        EntityKind::Worker => 58.0,
        EntityKind::Forklift => 66.0,
        EntityKind::Robot => 30.0,
    }
}

fn static_color(kind: ObstacleKind, color_id: u8) -> [u8; 3] {
    let base: [u8; 3] = match kind {
        ObstacleKind::Wall => [120, 122, 128],
        ObstacleKind::Shelf => [214, 120, 34],
        ObstacleKind::Container => [52, 105, 180],
        ObstacleKind::Barrel => [178, 60, 48],
        ObstacleKind::Misc => [130, 140, 148],
    };
    // Palette index shifts the shade slightly.
    let f = 0.82 + 0.06 * f64::from(color_id % 4);
    base.map(|c| ((f64::from(c) * f).round() as i64).clamp(0, 255) as u8)
}

fn entity_color(kind: EntityKind) -> [u8; 3] {
    match kind {
        EntityKind::Worker => [240, 200, 60],
        EntityKind::Forklift => [240, 140, 40],
        EntityKind::Robot => [90, 200, 220],
    }
}

/// Projected slab height in image px for an object of world height
/// `object_height_px` at perpendicular distance `perp_dist`.
pub fn projected_slab_height(
    object_height_px: f64,
    perp_dist: f64,
    image_width: u32,
    fov_deg: f64,
) -> f64 {
    let projection_plane = (image_width as f64 / 2.0) / (fov_deg.to_radians() / 2.0).tan();
    object_height_px * projection_plane / perp_dist
}

/// Render the egocentric view: ceiling fill, one slab per column, floor
/// fill. The column depth buffer is exactly `cast_depth` with one ray per
/// column.
pub fn render_ego(state: &WorldState, scene: &SceneConfig, cfg: &EgoRenderConfig) -> Image {
    let mut img = Image::filled(cfg.width, cfg.height, FLOOR);
    let profile = cast_rays(
        state.pose.position().to_vec2(),
        state.pose.theta.degrees() as f64,
        cfg.fov_deg,
        cfg.width as usize,
        &scene.obstacle_rects(),
        &scene.entity_discs(&state.entity_phases),
        Some((scene.map.width as f64, scene.map.height as f64)),
    );
    let mid = cfg.height as f64 / 2.0;
    for (col, ray) in profile.rays.iter().enumerate() {
        let horizon = mid.round() as i32;
        img.fill_column(col as u32, 0, horizon, CEILING);
        let (object_height, color) = match ray.hit {
            HitKind::Static => {
                let ob = &scene.obstacles[ray.hit_index.expect("static hit carries index")];
                (static_height(ob.height_class), static_color(ob.kind, ob.color_id))
            }
            HitKind::Entity => {
                let en = &scene.entities[ray.hit_index.expect("entity hit carries index")];
                (entity_height(en.kind), entity_color(en.kind))
            }
            HitKind::Boundary => (68.0, BOUNDARY_WALL),
            HitKind::None => continue,
        };
        let perp = ray.distance * ray.angle_deg.to_radians().cos();
        if perp <= 0.0 {
            img.fill_column(col as u32, 0, cfg.height as i32, color);
            continue;
        }
        let slab = projected_slab_height(object_height, perp, cfg.width, cfg.fov_deg);
        let top = (mid - slab / 2.0).round() as i32;
        let bottom = (mid + slab / 2.0).round() as i32;
        img.fill_column(col as u32, top, bottom, color);
    }
    img
}
