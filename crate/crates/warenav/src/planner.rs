//! A* planner over the agent's step lattice.
//!
//! The agent moves in fixed 34 px steps, so its reachable positions form a
//! lattice anchored at the start point. Planning runs directly on that
//! lattice in (position, heading) space with unit cost per action, which
//! makes plan length the exact number of steps (turns included) the agent
//! will spend executing it. Edges are validated with the same swept-disc
//! test the simulator uses, so a plan that exists is executable.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::dynamics::{AgentPose, Action, Heading};
use crate::geom::{dist_seg_point, dist_seg_rect, Rectf, Vec2};
use crate::world::{PxPoint, SceneConfig};
use crate::STEP_PX;

const MAX_EXPANSIONS: usize = 60_000;

/// Planner with a per-scene cache of static edge blockage. Entity discs are
/// passed per call since they move between replans.
pub struct LatticePlanner {
    rects: Vec<Rectf>,
    map_w: f64,
    map_h: f64,
    radius: f64,
    static_edges: HashMap<(PxPoint, Heading), bool>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    pos: PxPoint,
    theta: Heading,
}

struct OpenEntry {
    f: f64,
    seq: u64,
    node: Node,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.seq == other.seq
    }
}
impl Eq for OpenEntry {}
impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap; seq breaks ties deterministically.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl LatticePlanner {
    pub fn new(scene: &SceneConfig, agent_radius: f64) -> Self {
        Self {
            rects: scene.obstacle_rects(),
            map_w: scene.map.width as f64,
            map_h: scene.map.height as f64,
            radius: agent_radius,
            static_edges: HashMap::new(),
        }
    }

    /// Whether the forward edge from `pos` along `theta` is statically
    /// blocked (obstacles or map boundary). Cached.
    fn static_blocked(&mut self, pos: PxPoint, theta: Heading) -> bool {
        if let Some(&b) = self.static_edges.get(&(pos, theta)) {
            return b;
        }
        let (dx, dy) = theta.unit();
        let to = PxPoint::new(pos.x + dx * STEP_PX, pos.y + dy * STEP_PX);
        let a = pos.to_vec2();
        let b = to.to_vec2();
        let r = self.radius;
        let blocked = b.x - r < 0.0
            || b.x + r > self.map_w
            || b.y - r < 0.0
            || b.y + r > self.map_h
            || self.rects.iter().any(|rect| dist_seg_rect(a, b, *rect) < r);
        let _ = self.static_edges.insert((pos, theta), blocked);
        blocked
    }

    fn entity_blocked(&self, pos: PxPoint, theta: Heading, discs: &[(Vec2, f64)]) -> bool {
        if discs.is_empty() {
            return false;
        }
        let (dx, dy) = theta.unit();
        let to = Vec2::new((pos.x + dx * STEP_PX) as f64, (pos.y + dy * STEP_PX) as f64);
        let a = pos.to_vec2();
        discs
            .iter()
            .any(|(c, er)| dist_seg_point(a, to, *c) < self.radius + er)
    }

    /// Shortest action sequence (turns and forwards, unit cost each) from
    /// the pose to any lattice point within `success_radius` of the target.
    /// `entity_discs` are treated as additional obstacles at their current
    /// positions. Returns `None` when no path exists within the search
    /// budget.
    pub fn plan(
        &mut self,
        start: &AgentPose,
        target: PxPoint,
        success_radius: f64,
        entity_discs: &[(Vec2, f64)],
    ) -> Option<Vec<Action>> {
        let start_node = Node {
            pos: start.position(),
            theta: start.theta,
        };
        let goal = |n: &Node| n.pos.dist(target) <= success_radius;
        if goal(&start_node) {
            return Some(Vec::new());
        }

        let h = |n: &Node| ((n.pos.dist(target) - success_radius).max(0.0)) / STEP_PX as f64;

        let mut best_g: HashMap<Node, u32> = HashMap::new();
        let mut parent: HashMap<Node, (Node, Action)> = HashMap::new();
        let mut open = BinaryHeap::new();
        let mut seq = 0u64;
        let _ = best_g.insert(start_node, 0);
        open.push(OpenEntry {
            f: h(&start_node),
            seq,
            node: start_node,
        });

        let mut expansions = 0usize;
        while let Some(OpenEntry { node, .. }) = open.pop() {
            let g = *best_g.get(&node).unwrap();
            expansions += 1;
            if expansions > MAX_EXPANSIONS {
                return None;
            }
            if goal(&node) {
                let mut actions = Vec::new();
                let mut cur = node;
                while let Some((prev, act)) = parent.get(&cur) {
                    actions.push(*act);
                    cur = *prev;
                }
                actions.reverse();
                return Some(actions);
            }

            let mut neighbors: Vec<(Node, Action)> = vec![
                (
                    Node {
                        pos: node.pos,
                        theta: node.theta.turned_left(),
                    },
                    Action::TurnLeft,
                ),
                (
                    Node {
                        pos: node.pos,
                        theta: node.theta.turned_right(),
                    },
                    Action::TurnRight,
                ),
            ];
            if !self.static_blocked(node.pos, node.theta)
                && !self.entity_blocked(node.pos, node.theta, entity_discs)
            {
                let (dx, dy) = node.theta.unit();
                neighbors.push((
                    Node {
                        pos: PxPoint::new(node.pos.x + dx * STEP_PX, node.pos.y + dy * STEP_PX),
                        theta: node.theta,
                    },
                    Action::Forward,
                ));
            }

            for (next, action) in neighbors {
                let ng = g + 1;
                if best_g.get(&next).map_or(true, |&old| ng < old) {
                    let _ = best_g.insert(next, ng);
                    let _ = parent.insert(next, (node, action));
                    seq += 1;
                    open.push(OpenEntry {
                        f: ng as f64 + h(&next),
                        seq,
                        node: next,
                    });
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{HeightClass, MapSpec, Obstacle, ObstacleKind, PxRect};

    fn scene(obstacles: Vec<Obstacle>) -> SceneConfig {
        SceneConfig {
            name: "t".into(),
            seed: None,
            map: MapSpec::default(),
            obstacles,
            entities: vec![],
            pairs: vec![],
        }
    }

    fn pose(x: i32, y: i32, theta: Heading) -> AgentPose {
        AgentPose {
            x,
            y,
            theta,
            radius: 10.0,
        }
    }

    #[test]
    fn straight_corridor_plan_is_all_forward() {
        let mut planner = LatticePlanner::new(&scene(vec![]), 10.0);
        let plan = planner
            .plan(&pose(100, 200, Heading::East), PxPoint::new(270, 200), 20.0, &[])
            .unwrap();
        assert_eq!(plan, vec![Action::Forward; 5]);
    }

    #[test]
    fn plan_turns_then_advances() {
        let mut planner = LatticePlanner::new(&scene(vec![]), 10.0);
        let plan = planner
            .plan(&pose(100, 200, Heading::North), PxPoint::new(270, 200), 20.0, &[])
            .unwrap();
        // One right turn (North -> East) then five forwards.
        assert_eq!(plan.len(), 6);
        assert_eq!(plan[0], Action::TurnRight);
    }

    #[test]
    fn plan_routes_around_wall() {
        let wall = Obstacle {
            id: "w".into(),
            kind: ObstacleKind::Wall,
            height_class: HeightClass::Tall,
            color_id: 0,
            footprint: PxRect::new(200, 0, 20, 400),
        };
        let mut planner = LatticePlanner::new(&scene(vec![wall]), 10.0);
        let plan = planner
            .plan(&pose(100, 200, Heading::East), PxPoint::new(372, 200), 20.0, &[])
            .unwrap();
        assert!(plan.len() > 8, "must detour below the wall: {plan:?}");
    }

    #[test]
    fn sealed_box_has_no_plan() {
        let walls = vec![
            Obstacle {
                id: "a".into(),
                kind: ObstacleKind::Wall,
                height_class: HeightClass::Tall,
                color_id: 0,
                footprint: PxRect::new(300, 0, 20, 512),
            },
            Obstacle {
                id: "b".into(),
                kind: ObstacleKind::Wall,
                height_class: HeightClass::Tall,
                color_id: 0,
                footprint: PxRect::new(0, 0, 20, 512),
            },
            Obstacle {
                id: "c".into(),
                kind: ObstacleKind::Wall,
                height_class: HeightClass::Tall,
                color_id: 0,
                footprint: PxRect::new(0, 0, 320, 20),
            },
            Obstacle {
                id: "d".into(),
                kind: ObstacleKind::Wall,
                height_class: HeightClass::Tall,
                color_id: 0,
                footprint: PxRect::new(0, 492, 320, 20),
            },
        ];
        let mut planner = LatticePlanner::new(&scene(walls), 10.0);
        assert!(planner
            .plan(&pose(150, 250, Heading::East), PxPoint::new(800, 250), 20.0, &[])
            .is_none());
    }
}
