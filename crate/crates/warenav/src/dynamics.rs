//! Agent kinematics: the discrete action set, the heading/compass
//! convention, collision semantics for forward motion, and per-tick
//! advancement of dynamic entities.
//!
//! All transition functions are pure; a [`WorldState`] is a value passed
//! from step to step, so distinct episodes can run concurrently without
//! shared mutable state.

use serde::{Deserialize, Serialize};

use crate::geom::{dist_seg_point, dist_seg_rect};
use crate::world::{DynamicEntity, PxPoint, SceneConfig};
use crate::STEP_PX;

/// Cardinal heading. The compass convention is part of the environment
/// contract: 0° faces West, 90° North, 180° East, 270° South, with +X East
/// (image right) and +Y South (image down).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum Heading {
    West,
    North,
    East,
    South,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::West, Heading::North, Heading::East, Heading::South];

    pub fn degrees(self) -> u16 {
        match self {
            Heading::West => 0,
            Heading::North => 90,
            Heading::East => 180,
            Heading::South => 270,
        }
    }

    /// Unit direction vector in map coordinates (integer components).
    pub fn unit(self) -> (i32, i32) {
        match self {
            Heading::West => (-1, 0),
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
        }
    }

    pub fn turned_right(self) -> Heading {
        Heading::try_from((self.degrees() + 90) % 360).unwrap()
    }

    pub fn turned_left(self) -> Heading {
        Heading::try_from((self.degrees() + 270) % 360).unwrap()
    }
}

impl TryFrom<u16> for Heading {
    type Error = String;

    fn try_from(deg: u16) -> Result<Self, Self::Error> {
        match deg {
            0 => Ok(Heading::West),
            90 => Ok(Heading::North),
            180 => Ok(Heading::East),
            270 => Ok(Heading::South),
            other => Err(format!(
                "invalid heading {other}°: expected one of 0, 90, 180, 270"
            )),
        }
    }
}

impl From<Heading> for u16 {
    fn from(h: Heading) -> u16 {
        h.degrees()
    }
}

/// The discrete action space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Forward,
    TurnLeft,
    TurnRight,
    Stop,
}

impl Action {
    pub const ALL: [Action; 4] = [
        Action::Forward,
        Action::TurnLeft,
        Action::TurnRight,
        Action::Stop,
    ];

    /// Snake-case name used in prompts, logs, and the CLI.
    pub fn name(self) -> &'static str {
        match self {
            Action::Forward => "forward",
            Action::TurnLeft => "turn_left",
            Action::TurnRight => "turn_right",
            Action::Stop => "stop",
        }
    }

    /// Spaced form used in history lines ("turn left").
    pub fn history_label(self) -> &'static str {
        match self {
            Action::Forward => "forward",
            Action::TurnLeft => "turn left",
            Action::TurnRight => "turn right",
            Action::Stop => "stop",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TurnDirection {
    Left,
    Right,
}

/// Agent position, heading, and body disc radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentPose {
    pub x: i32,
    pub y: i32,
    pub theta: Heading,
    /// Body disc radius in px.
    pub radius: f64,
}

impl AgentPose {
    pub fn position(&self) -> PxPoint {
        PxPoint::new(self.x, self.y)
    }
}

/// Everything that changes from step to step.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    pub pose: AgentPose,
    pub entity_phases: Vec<f64>,
    pub tick: u32,
    pub target: PxPoint,
}

impl WorldState {
    /// Initial state for one run of a scene.
    pub fn initial(scene: &SceneConfig, pair_index: usize, agent_radius: f64) -> WorldState {
        let pair = &scene.pairs[pair_index];
        WorldState {
            pose: AgentPose {
                x: pair.start.x,
                y: pair.start.y,
                theta: pair.start_theta,
                radius: agent_radius,
            },
            entity_phases: scene.initial_phases(),
            tick: 0,
            target: pair.target,
        }
    }
}

/// Result of advancing the world by one agent action.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: WorldState,
    /// A forward action was blocked; the position did not change.
    pub collided: bool,
    pub attempted_forward: bool,
    pub moved: bool,
    /// An entity disc overlaps the agent disc after entities advanced.
    /// Logged for analysis; not a collision in the metric sense.
    pub entity_contact: bool,
}

/// Rotate in place by 90°. Right adds, left subtracts (mod 360).
pub fn apply_turn(pose: &AgentPose, direction: TurnDirection) -> AgentPose {
    let theta = match direction {
        TurnDirection::Right => pose.theta.turned_right(),
        TurnDirection::Left => pose.theta.turned_left(),
    };
    AgentPose { theta, ..*pose }
}

/// Where a forward step from this pose lands: one step of 34 px along the
/// heading (West -34x, North -34y, East +34x, South +34y).
pub fn forward_target(pose: &AgentPose) -> PxPoint {
    let (dx, dy) = pose.theta.unit();
    PxPoint::new(pose.x + dx * STEP_PX, pose.y + dy * STEP_PX)
}

/// Whether a move from `from` to `to` is blocked. The agent body sweeps a
/// disc along the motion, so the test is capsule-vs-geometry: any static
/// footprint, any entity disc at its current phase, or the map boundary.
/// The swept test (rather than endpoint-only) prevents a 34 px step from
/// tunneling through thin walls.
pub fn check_blocked(
    from: PxPoint,
    to: PxPoint,
    radius: f64,
    scene: &SceneConfig,
    entity_phases: &[f64],
) -> bool {
    let a = from.to_vec2();
    let b = to.to_vec2();
    let w = scene.map.width as f64;
    let h = scene.map.height as f64;
    if b.x - radius < 0.0 || b.x + radius > w || b.y - radius < 0.0 || b.y + radius > h {
        return true;
    }
    for ob in &scene.obstacles {
        if dist_seg_rect(a, b, ob.footprint.to_rectf()) < radius {
            return true;
        }
    }
    for (center, r) in scene.entity_discs(entity_phases) {
        if dist_seg_point(a, b, center) < radius + r {
            return true;
        }
    }
    false
}

/// Advance an entity by one tick of its speed along the looped polyline.
pub fn advance_entity(entity: &DynamicEntity, phase: f64) -> f64 {
    let len = entity.path_length();
    if len <= 0.0 {
        return 0.0;
    }
    (phase + entity.speed).rem_euclid(len)
}

/// Execute one non-stop action. Turns change heading only; forward moves a
/// full step unless blocked, in which case the position is unchanged and
/// the outcome is flagged as a collision. After the agent's action
/// resolves, every entity advances one tick (the world is frozen while the
/// agent decides, so the agent always acts on the state it observed).
pub fn step_world(state: &WorldState, action: Action, scene: &SceneConfig) -> StepOutcome {
    debug_assert!(
        action != Action::Stop,
        "stop is handled by the episode runner"
    );
    let mut pose = state.pose;
    let mut collided = false;
    let mut attempted_forward = false;
    let mut moved = false;
    match action {
        Action::TurnLeft => pose = apply_turn(&pose, TurnDirection::Left),
        Action::TurnRight => pose = apply_turn(&pose, TurnDirection::Right),
        Action::Forward => {
            attempted_forward = true;
            let candidate = forward_target(&pose);
            if check_blocked(
                pose.position(),
                candidate,
                pose.radius,
                scene,
                &state.entity_phases,
            ) {
                collided = true;
            } else {
                pose.x = candidate.x;
                pose.y = candidate.y;
                moved = true;
            }
        }
        Action::Stop => {}
    }
    let entity_phases: Vec<f64> = scene
        .entities
        .iter()
        .zip(&state.entity_phases)
        .map(|(e, &p)| advance_entity(e, p))
        .collect();
    let agent_center = pose.position().to_vec2();
    let entity_contact = scene
        .entity_discs(&entity_phases)
        .iter()
        .any(|(c, r)| c.dist(agent_center) < pose.radius + r);
    StepOutcome {
        state: WorldState {
            pose,
            entity_phases,
            tick: state.tick + 1,
            target: state.target,
        },
        collided,
        attempted_forward,
        moved,
        entity_contact,
    }
}

/// Euclidean distance from the agent to the target, full precision.
/// Rounding happens only when formatting prompts.
pub fn distance_to_target(pose: &AgentPose, target: PxPoint) -> f64 {
    pose.position().dist(target)
}
