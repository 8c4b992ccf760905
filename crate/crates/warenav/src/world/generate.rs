//! Seeded procedural warehouse generation.
//!
//! Layout recipe: perimeter walls, horizontal rows of shelving with
//! cross-aisle gaps, scattered clutter (barrels, containers, misc), and
//! dynamic entities running rectangular loops in the aisles. Start-target
//! pairs are sampled last and kept only if they are provably navigable:
//! free grid path in the static scene, and a lattice plan (turns included)
//! of bounded length even with every entity frozen at its spawn position.
//! Difficulty labels come from plan-length terciles over the candidate
//! pool.
//!
//! Generation is a pure function of `(seed, params)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dynamics::{AgentPose, Heading};
use crate::geom::dist_point_rect;
use crate::planner::LatticePlanner;
use crate::world::{
    occupancy_grid, validate_scene, Difficulty, DynamicEntity, EntityKind, HeightClass, MapSpec,
    Obstacle, ObstacleKind, PxPoint, PxRect, SceneConfig, StartTargetPair,
};
use crate::{DEFAULT_SUCCESS_RADIUS_PX, STEP_PX};

const WALL_THICKNESS: i32 = 10;
const SHELF_HEIGHT: i32 = 40;
const CROSS_AISLE_WIDTH: i32 = 96;
const MIN_AISLE_HEIGHT: i32 = 80;
/// Required clearance between placed clutter and existing obstacles.
const CLUTTER_GAP: f64 = 12.0;

/// Generator knobs. Ranges are validated by [`generate_scene`].
#[derive(Clone, Debug)]
pub struct GeneratorParams {
    pub map: MapSpec,
    /// Rows of shelving, 0..=3 for the default map height.
    pub shelf_rows: u32,
    /// Vertical gaps through each shelf row, 1..=4.
    pub cross_aisles: u32,
    /// Clutter amount in [0, 1]; 1.0 over-constrains the default map.
    pub clutter_density: f64,
    /// Dynamic entities, 0..=8.
    pub entity_count: u32,
    /// Base loop speed in px per tick; per-entity jitter of +-4 applies.
    pub entity_speed: f64,
    /// Start-target pairs to emit, 1..=8.
    pub pair_count: u32,
    pub agent_radius: f64,
    /// Upper bound on the planned step count (turns included) of any pair.
    pub max_path_steps: u32,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            map: MapSpec::default(),
            shelf_rows: 3,
            cross_aisles: 2,
            clutter_density: 0.15,
            entity_count: 3,
            entity_speed: 12.0,
            pair_count: 4,
            agent_radius: crate::DEFAULT_AGENT_RADIUS_PX,
            max_path_steps: 55,
        }
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("generator parameter out of range: {0}")]
    InvalidParams(String),
    #[error("scene generation failed after bounded retries: {0}")]
    Failed(String),
}

/// Generate a validated scene. Same `(seed, params)` always yields an
/// identical config.
pub fn generate_scene(seed: u64, params: &GeneratorParams) -> Result<SceneConfig, GenerateError> {
    check_params(params)?;
    // A handful of whole-scene retries with derived sub-seeds; each attempt
    // is itself deterministic.
    let mut last_err = String::new();
    for attempt in 0..4u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        match generate_once(seed, params, &mut rng) {
            Ok(cfg) => {
                let violations = validate_scene(&cfg);
                if violations.is_empty() {
                    return Ok(cfg);
                }
                last_err = format!("generated scene failed validation: {}", violations[0]);
            }
            Err(e) => last_err = e,
        }
    }
    Err(GenerateError::Failed(last_err))
}

fn check_params(p: &GeneratorParams) -> Result<(), GenerateError> {
    let fail = |m: String| Err(GenerateError::InvalidParams(m));
    if p.map.width < 400 || p.map.height < 300 {
        return fail(format!("map {}x{} too small (min 400x300)", p.map.width, p.map.height));
    }
    if p.shelf_rows > 4 {
        return fail(format!("shelf_rows {} (max 4)", p.shelf_rows));
    }
    if !(1..=4).contains(&p.cross_aisles) {
        return fail(format!("cross_aisles {} (1..=4)", p.cross_aisles));
    }
    if !(0.0..=1.0).contains(&p.clutter_density) {
        return fail(format!("clutter_density {} (0..=1)", p.clutter_density));
    }
    if p.entity_count > 8 {
        return fail(format!("entity_count {} (max 8)", p.entity_count));
    }
    if !(0.0..=40.0).contains(&p.entity_speed) {
        return fail(format!("entity_speed {} (0..=40)", p.entity_speed));
    }
    if !(1..=8).contains(&p.pair_count) {
        return fail(format!("pair_count {} (1..=8)", p.pair_count));
    }
    if !(4.0..=16.0).contains(&p.agent_radius) {
        return fail(format!("agent_radius {} (4..=16)", p.agent_radius));
    }
    if !(10..=70).contains(&p.max_path_steps) {
        return fail(format!("max_path_steps {} (10..=70)", p.max_path_steps));
    }
    let inner_h = p.map.height as i32 - 2 * WALL_THICKNESS;
    if p.shelf_rows > 0 {
        let aisle = (inner_h - p.shelf_rows as i32 * SHELF_HEIGHT) / (p.shelf_rows as i32 + 1);
        if aisle < MIN_AISLE_HEIGHT {
            return fail(format!(
                "shelf_rows {} leaves {aisle} px aisles (min {MIN_AISLE_HEIGHT})",
                p.shelf_rows
            ));
        }
    }
    Ok(())
}

fn generate_once(
    seed: u64,
    params: &GeneratorParams,
    rng: &mut ChaCha8Rng,
) -> Result<SceneConfig, String> {
    let w = params.map.width as i32;
    let h = params.map.height as i32;
    let mut obstacles = Vec::new();

    // Perimeter walls.
    for (i, rect) in [
        PxRect::new(0, 0, w, WALL_THICKNESS),
        PxRect::new(0, h - WALL_THICKNESS, w, WALL_THICKNESS),
        PxRect::new(0, 0, WALL_THICKNESS, h),
        PxRect::new(w - WALL_THICKNESS, 0, WALL_THICKNESS, h),
    ]
    .into_iter()
    .enumerate()
    {
        obstacles.push(Obstacle {
            id: format!("wall-{i}"),
            kind: ObstacleKind::Wall,
            height_class: HeightClass::Tall,
            color_id: 0,
            footprint: rect,
        });
    }

    // Shelf rows with cross-aisle gaps.
    let rows = params.shelf_rows as i32;
    let inner_h = h - 2 * WALL_THICKNESS;
    let aisle_h = if rows > 0 {
        (inner_h - rows * SHELF_HEIGHT) / (rows + 1)
    } else {
        inner_h
    };
    let shelf_x0 = WALL_THICKNESS + 70;
    let shelf_x1 = w - WALL_THICKNESS - 70;
    let mut aisle_centers_y = Vec::new();
    let mut y_cursor = WALL_THICKNESS;
    for row in 0..rows {
        aisle_centers_y.push(y_cursor + aisle_h / 2);
        let row_y = y_cursor + aisle_h;
        y_cursor = row_y + SHELF_HEIGHT;

        // Positions for the cross-aisle gaps, jittered around even spacing.
        let span = shelf_x1 - shelf_x0;
        let n_gaps = params.cross_aisles as i32;
        let mut gap_starts: Vec<i32> = (0..n_gaps)
            .map(|g| {
                let center = shelf_x0 + span * (g * 2 + 1) / (n_gaps * 2);
                let jitter = rng.gen_range(-30..=30);
                (center + jitter - CROSS_AISLE_WIDTH / 2)
                    .clamp(shelf_x0, shelf_x1 - CROSS_AISLE_WIDTH)
            })
            .collect();
        gap_starts.sort_unstable();

        let mut seg_start = shelf_x0;
        let mut seg_idx = 0;
        let mut push_segment = |from: i32, to: i32, seg_idx: &mut i32| {
            if to - from >= 30 {
                obstacles.push(Obstacle {
                    id: format!("shelf-{row}-{seg_idx}"),
                    kind: ObstacleKind::Shelf,
                    height_class: HeightClass::Tall,
                    color_id: (*seg_idx % 4) as u8,
                    footprint: PxRect::new(from, row_y, to - from, SHELF_HEIGHT),
                });
            }
            *seg_idx += 1;
        };
        for gs in &gap_starts {
            let gap_start = (*gs).max(seg_start);
            push_segment(seg_start, gap_start, &mut seg_idx);
            seg_start = gap_start + CROSS_AISLE_WIDTH;
        }
        push_segment(seg_start, shelf_x1, &mut seg_idx);
    }
    aisle_centers_y.push(y_cursor + aisle_h / 2);

    // Clutter. Rejection sampling saturates well below full density, so a
    // placement rate under half the target means the density
    // over-constrains the map.
    let clutter_target = (params.clutter_density * 90.0).round() as usize;
    let mut placed = 0usize;
    let mut clutter_idx = 0usize;
    for _ in 0..clutter_target {
        let mut ok = false;
        for _try in 0..40 {
            let kind_roll = rng.gen_range(0..3);
            let (kind, cw, ch) = match kind_roll {
                0 => {
                    let s = rng.gen_range(16..=26);
                    (ObstacleKind::Barrel, s, s)
                }
                1 => (
                    ObstacleKind::Container,
                    rng.gen_range(46..=78),
                    rng.gen_range(32..=52),
                ),
                _ => (
                    ObstacleKind::Misc,
                    rng.gen_range(18..=40),
                    rng.gen_range(18..=40),
                ),
            };
            let x = rng.gen_range(WALL_THICKNESS + 20..=w - WALL_THICKNESS - 20 - cw);
            let y = rng.gen_range(WALL_THICKNESS + 20..=h - WALL_THICKNESS - 20 - ch);
            let rect = PxRect::new(x, y, cw, ch);
            let inflated = rect.to_rectf().inflate(CLUTTER_GAP);
            if obstacles
                .iter()
                .any(|o| o.footprint.to_rectf().overlaps(inflated))
            {
                continue;
            }
            obstacles.push(Obstacle {
                id: format!("clutter-{clutter_idx:02}"),
                kind,
                height_class: if kind == ObstacleKind::Barrel {
                    HeightClass::Low
                } else {
                    HeightClass::Tall
                },
                color_id: rng.gen_range(0..4),
                footprint: rect,
            });
            clutter_idx += 1;
            placed += 1;
            ok = true;
            break;
        }
        let _ = ok;
    }
    if clutter_target > 0 && (placed as f64) < clutter_target as f64 * 0.5 {
        return Err(format!(
            "clutter over-constrained: placed {placed} of {clutter_target}"
        ));
    }

    // Entities on rectangular aisle loops.
    let mut entities = Vec::new();
    let kinds = [EntityKind::Worker, EntityKind::Forklift, EntityKind::Robot];
    for e in 0..params.entity_count {
        let kind = kinds[e as usize % 3];
        let radius = match kind {
            EntityKind::Worker => 10.0,
            EntityKind::Forklift => 14.0,
            EntityKind::Robot => 9.0,
        };
        let mut entity = None;
        for _try in 0..30 {
            let band = rng.gen_range(0..aisle_centers_y.len());
            let yc = aisle_centers_y[band];
            let half = (aisle_h / 2 - radius as i32 - 10).clamp(4, 14);
            let x0 = rng.gen_range(WALL_THICKNESS + 40..=w / 2 - 60);
            let x1 = rng.gen_range(w / 2 + 60..=w - WALL_THICKNESS - 40);
            let wps = vec![
                PxPoint::new(x0, yc - half),
                PxPoint::new(x1, yc - half),
                PxPoint::new(x1, yc + half),
                PxPoint::new(x0, yc + half),
            ];
            let clear = wps.iter().all(|p| {
                obstacles.iter().all(|o| !o.footprint.contains_point(*p)) && p.x > 0 && p.y > 0
            });
            if !clear {
                continue;
            }
            let speed = (params.entity_speed + rng.gen_range(-4.0..=4.0)).max(0.0);
            let mut en = DynamicEntity {
                id: format!("entity-{e:02}"),
                kind,
                radius,
                speed,
                phase: 0.0,
                waypoints: wps,
            };
            en.phase = rng.gen::<f64>() * en.path_length();
            entity = Some(en);
            break;
        }
        match entity {
            Some(en) => entities.push(en),
            None => return Err(format!("could not place entity {e}")),
        }
    }

    // Start-target pairs.
    let mut partial = SceneConfig {
        name: format!("warehouse-{seed:04}"),
        seed: Some(seed),
        map: params.map,
        obstacles,
        entities,
        pairs: Vec::new(),
    };
    let pairs = sample_pairs(&partial, params, rng)?;
    partial.pairs = pairs;
    Ok(partial.canonicalize())
}

struct Candidate {
    pair: StartTargetPair,
    steps: usize,
}

fn sample_pairs(
    scene: &SceneConfig,
    params: &GeneratorParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<StartTargetPair>, String> {
    let w = scene.map.width as i32;
    let h = scene.map.height as i32;
    let radius = params.agent_radius;
    let grid = occupancy_grid(scene, 34, radius);
    let mut planner = LatticePlanner::new(scene, radius);
    let frozen = scene.entity_discs(&scene.initial_phases());

    let clearance = radius + 14.0;
    let point_free = |scene: &SceneConfig, p: PxPoint| -> bool {
        let v = p.to_vec2();
        if p.x < WALL_THICKNESS + 24
            || p.y < WALL_THICKNESS + 24
            || p.x > w - WALL_THICKNESS - 24
            || p.y > h - WALL_THICKNESS - 24
        {
            return false;
        }
        scene
            .obstacles
            .iter()
            .all(|o| dist_point_rect(v, o.footprint.to_rectf()) > clearance)
            && frozen
                .iter()
                .all(|(c, er)| c.dist(v) > radius + er + 16.0)
    };
    let cell_free = |p: PxPoint| {
        let (cx, cy) = grid.cell_of(p);
        !grid.is_blocked(cx, cy)
    };

    // Free cells give a dense start-sampling pool.
    let mut free_cells: Vec<(usize, usize)> = Vec::new();
    for cy in 0..grid.rows {
        for cx in 0..grid.cols {
            if !grid.is_blocked(cx, cy) {
                free_cells.push((cx, cy));
            }
        }
    }
    if free_cells.is_empty() {
        return Err("no free cells for pair sampling".to_string());
    }

    let needed = (params.pair_count as usize * 3).max(params.pair_count as usize + 2);
    let mut candidates: Vec<Candidate> = Vec::new();
    for _ in 0..4000 {
        if candidates.len() >= needed {
            break;
        }
        let (cx, cy) = free_cells[rng.gen_range(0..free_cells.len())];
        let start = PxPoint::new(
            (cx as i32) * 34 + 17 + rng.gen_range(-8..=8),
            (cy as i32) * 34 + 17 + rng.gen_range(-8..=8),
        );
        if !point_free(scene, start) || !cell_free(start) {
            continue;
        }
        let theta = Heading::ALL[rng.gen_range(0..4)];
        // Target on the start's step lattice plus a small jitter, so a
        // reachable lattice point always lands inside the success radius.
        // Offset ranges are clamped to keep the target on the map.
        let di_lo = -(start.x - 40) / STEP_PX;
        let di_hi = (w - 40 - start.x) / STEP_PX;
        let dj_lo = -(start.y - 40) / STEP_PX;
        let dj_hi = (h - 40 - start.y) / STEP_PX;
        let di = rng.gen_range(di_lo..=di_hi);
        let dj = rng.gen_range(dj_lo..=dj_hi);
        if di.abs() + dj.abs() < 3 {
            continue;
        }
        let (jx, jy) = loop {
            let jx = rng.gen_range(-12i32..=12);
            let jy = rng.gen_range(-12i32..=12);
            if jx * jx + jy * jy <= 144 {
                break (jx, jy);
            }
        };
        let target = PxPoint::new(start.x + di * STEP_PX + jx, start.y + dj * STEP_PX + jy);
        if !scene.in_bounds(target) || !point_free(scene, target) || !cell_free(target) {
            continue;
        }
        if start.dist(target) <= DEFAULT_SUCCESS_RADIUS_PX {
            continue;
        }
        if !grid.path_exists(start, target) {
            continue;
        }
        let pose = AgentPose {
            x: start.x,
            y: start.y,
            theta,
            radius,
        };
        let plan = match planner.plan(&pose, target, DEFAULT_SUCCESS_RADIUS_PX, &frozen) {
            Some(p) if p.len() <= params.max_path_steps as usize => p,
            _ => continue,
        };
        candidates.push(Candidate {
            pair: StartTargetPair {
                start,
                start_theta: theta,
                target,
                difficulty: Difficulty::Easy,
            },
            steps: plan.len(),
        });
    }
    if candidates.len() < needed {
        return Err(format!(
            "could not sample enough reachable pairs ({} of {needed})",
            candidates.len()
        ));
    }

    candidates.sort_by_key(|c| c.steps);
    let n = candidates.len();
    let k = params.pair_count as usize;
    let tercile = |idx: usize| {
        if idx * 3 < n {
            Difficulty::Easy
        } else if idx * 3 < 2 * n {
            Difficulty::Medium
        } else {
            Difficulty::Hard
        }
    };
    let mut pairs = Vec::with_capacity(k);
    for i in 0..k {
        let idx = if k == 1 { 0 } else { i * (n - 1) / (k - 1) };
        let mut pair = candidates[idx].pair;
        pair.difficulty = tercile(idx);
        pairs.push(pair);
    }
    Ok(pairs)
}
