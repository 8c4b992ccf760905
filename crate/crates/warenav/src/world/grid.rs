//! Occupancy-grid extraction for planners and reachability checks.

use std::collections::VecDeque;

use crate::geom::Rectf;
use crate::world::{PxPoint, SceneConfig};

/// Boolean occupancy grid over the map, row-major.
#[derive(Clone, Debug)]
pub struct OccupancyGrid {
    pub cols: usize,
    pub rows: usize,
    pub cell_px: u32,
    blocked: Vec<bool>,
}

impl OccupancyGrid {
    pub fn is_blocked(&self, cx: usize, cy: usize) -> bool {
        self.blocked[cy * self.cols + cx]
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    /// Cell containing a pixel point. Points on the far map edge fall into
    /// the last cell.
    pub fn cell_of(&self, p: PxPoint) -> (usize, usize) {
        let cx = (p.x.max(0) as usize / self.cell_px as usize).min(self.cols - 1);
        let cy = (p.y.max(0) as usize / self.cell_px as usize).min(self.rows - 1);
        (cx, cy)
    }

    /// BFS over free cells, 4-connected.
    pub fn path_exists(&self, from: PxPoint, to: PxPoint) -> bool {
        let start = self.cell_of(from);
        let goal = self.cell_of(to);
        if self.is_blocked(start.0, start.1) || self.is_blocked(goal.0, goal.1) {
            return false;
        }
        let mut seen = vec![false; self.cols * self.rows];
        let mut queue = VecDeque::new();
        seen[start.1 * self.cols + start.0] = true;
        queue.push_back(start);
        while let Some((cx, cy)) = queue.pop_front() {
            if (cx, cy) == goal {
                return true;
            }
            let push = |nx: usize, ny: usize, seen: &mut Vec<bool>, q: &mut VecDeque<_>| {
                if !self.is_blocked(nx, ny) && !seen[ny * self.cols + nx] {
                    seen[ny * self.cols + nx] = true;
                    q.push_back((nx, ny));
                }
            };
            if cx > 0 {
                push(cx - 1, cy, &mut seen, &mut queue);
            }
            if cx + 1 < self.cols {
                push(cx + 1, cy, &mut seen, &mut queue);
            }
            if cy > 0 {
                push(cx, cy - 1, &mut seen, &mut queue);
            }
            if cy + 1 < self.rows {
                push(cx, cy + 1, &mut seen, &mut queue);
            }
        }
        false
    }
}

/// Rasterize the static scene into cells of `cell_px` pixels. A cell is
/// blocked iff it overlaps any obstacle footprint inflated by
/// `inflate_radius` (the agent body radius, so free cells admit the agent
/// center).
pub fn occupancy_grid(cfg: &SceneConfig, cell_px: u32, inflate_radius: f64) -> OccupancyGrid {
    assert!(cell_px >= 1, "cell_px must be at least 1");
    let cols = (cfg.map.width as usize).div_ceil(cell_px as usize);
    let rows = (cfg.map.height as usize).div_ceil(cell_px as usize);
    let inflated: Vec<Rectf> = cfg
        .obstacles
        .iter()
        .map(|o| o.footprint.to_rectf().inflate(inflate_radius))
        .collect();
    let mut blocked = vec![false; cols * rows];
    for cy in 0..rows {
        for cx in 0..cols {
            let cell = Rectf::from_xywh(
                (cx * cell_px as usize) as f64,
                (cy * cell_px as usize) as f64,
                cell_px as f64,
                cell_px as f64,
            );
            if inflated.iter().any(|r| r.overlaps(cell)) {
                blocked[cy * cols + cx] = true;
            }
        }
    }
    OccupancyGrid {
        cols,
        rows,
        cell_px,
        blocked,
    }
}
