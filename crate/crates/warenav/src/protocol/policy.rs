//! Policies: the trait the episode runner drives, the model-backed
//! policy, and the scripted baselines (greedy heading-chaser and the A*
//! oracle used as a correctness reference and upper bound).

use thiserror::Error;

use crate::dynamics::{distance_to_target, Action, Heading, WorldState};
use crate::planner::LatticePlanner;
use crate::protocol::client::ModelClient;
use crate::protocol::decision::{parse_decision, ParseStatus};
use crate::protocol::prompt::PromptBundle;
use crate::protocol::ClientError;
use crate::sensors::DepthProfile;
use crate::world::SceneConfig;
use crate::STEP_PX;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Client(#[from] ClientError),
}

/// What a policy sees each step.
pub struct Observation<'a> {
    pub state: &'a WorldState,
    pub scene: &'a SceneConfig,
    pub depth: &'a DepthProfile,
    pub success_radius_px: f64,
    pub prompt: &'a PromptBundle,
}

/// A policy's answer for one step, with everything the log needs.
#[derive(Clone, Debug)]
pub struct PolicyDecision {
    pub action: Action,
    pub reasoning: Option<String>,
    pub raw_response: Option<String>,
    pub raw_request: Option<String>,
    pub parse_status: Option<ParseStatus>,
    pub latency_ms: u64,
}

impl PolicyDecision {
    fn scripted(action: Action) -> Self {
        Self {
            action,
            reasoning: None,
            raw_response: None,
            raw_request: None,
            parse_status: None,
            latency_ms: 0,
        }
    }
}

pub trait Policy: Send {
    fn name(&self) -> &str;

    /// Whether prompts handed to this policy need rendered images.
    fn needs_images(&self) -> bool {
        false
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError>;
}

/// Target bearing in heading-space degrees (0 = West, 90 = North, ...).
fn bearing_deg(from: (f64, f64), to: (f64, f64)) -> f64 {
    let vx = to.0 - from.0;
    let vy = to.1 - from.1;
    // Heading theta points along (-cos theta, -sin theta).
    let deg = (-vy).atan2(-vx).to_degrees();
    deg.rem_euclid(360.0)
}

fn circular_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Scripted baseline: walk straight at the target along its dominant axis,
/// turning toward the bearing when misaligned or blocked. No planning, no
/// memory; it gets stuck on anything concave.
pub struct GreedyPolicy;

impl GreedyPolicy {
    /// Forward is considered unsafe when anything inside a narrow forward
    /// cone sits within one step plus the body radius.
    fn forward_blocked(obs: &Observation<'_>) -> bool {
        let clearance = STEP_PX as f64 + obs.state.pose.radius + 2.0;
        obs.depth
            .min_in_cone(15.0, f64::INFINITY)
            .is_some_and(|d| d < clearance)
    }
}

impl Policy for GreedyPolicy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
        let pose = &obs.state.pose;
        let target = obs.state.target;
        let d = distance_to_target(pose, target);
        if d <= obs.success_radius_px {
            return Ok(PolicyDecision::scripted(Action::Stop));
        }
        let dx = target.x - pose.x;
        let dy = target.y - pose.y;
        let dominant = if dx.abs() >= dy.abs() {
            if dx > 0 {
                Heading::East
            } else {
                Heading::West
            }
        } else if dy > 0 {
            Heading::South
        } else {
            Heading::North
        };
        if pose.theta == dominant && !Self::forward_blocked(obs) {
            return Ok(PolicyDecision::scripted(Action::Forward));
        }
        let bearing = bearing_deg(
            (pose.x as f64, pose.y as f64),
            (target.x as f64, target.y as f64),
        );
        let left = circular_diff(pose.theta.turned_left().degrees() as f64, bearing);
        let right = circular_diff(pose.theta.turned_right().degrees() as f64, bearing);
        let action = if left < right {
            Action::TurnLeft
        } else {
            Action::TurnRight
        };
        Ok(PolicyDecision::scripted(action))
    }
}

/// A* reference policy: replans on the step lattice every step against the
/// static scene plus entity discs at their current positions, and emits
/// the first action of the plan. When entities transiently seal every
/// corridor it rotates in place and replans next step.
pub struct OraclePolicy {
    planner: LatticePlanner,
}

impl OraclePolicy {
    pub fn new(scene: &SceneConfig, agent_radius: f64) -> Self {
        Self {
            planner: LatticePlanner::new(scene, agent_radius),
        }
    }
}

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        "oracle"
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
        let state = obs.state;
        if distance_to_target(&state.pose, state.target) <= obs.success_radius_px {
            return Ok(PolicyDecision::scripted(Action::Stop));
        }
        let discs = obs.scene.entity_discs(&state.entity_phases);
        let plan = self.planner.plan(
            &state.pose,
            state.target,
            obs.success_radius_px,
            &discs,
        );
        let action = match plan {
            Some(actions) => actions.first().copied().unwrap_or(Action::Stop),
            None => Action::TurnRight,
        };
        Ok(PolicyDecision::scripted(action))
    }
}

/// Policy backed by a chat-completion endpoint.
pub struct ModelPolicy {
    client: ModelClient,
    default_action: Action,
    name: String,
}

impl ModelPolicy {
    pub fn new(client: ModelClient, default_action: Action) -> Self {
        let name = client.model_id().to_string();
        Self {
            client,
            default_action,
            name,
        }
    }
}

impl Policy for ModelPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn needs_images(&self) -> bool {
        true
    }

    fn decide(&mut self, obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
        let started = std::time::Instant::now();
        let raw = self.client.query(obs.prompt)?;
        let latency_ms = started.elapsed().as_millis() as u64;
        let decision = parse_decision(&raw, self.default_action);
        Ok(PolicyDecision {
            action: decision.action,
            reasoning: Some(decision.reasoning),
            raw_response: Some(decision.raw),
            raw_request: Some(self.client.loggable_request_body(obs.prompt).to_string()),
            parse_status: Some(decision.parse_status),
            latency_ms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::AgentPose;
    use crate::protocol::prompt::PromptVariant;
    use crate::sensors::cast_depth;
    use crate::world::{MapSpec, PxPoint};

    fn empty_scene() -> SceneConfig {
        SceneConfig {
            name: "t".into(),
            seed: None,
            map: MapSpec::default(),
            obstacles: vec![],
            entities: vec![],
            pairs: vec![],
        }
    }

    fn obs_fixture<'a>(
        state: &'a WorldState,
        scene: &'a SceneConfig,
        depth: &'a DepthProfile,
        prompt: &'a PromptBundle,
    ) -> Observation<'a> {
        Observation {
            state,
            scene,
            depth,
            success_radius_px: 20.0,
            prompt,
        }
    }

    fn dummy_prompt() -> PromptBundle {
        PromptBundle {
            text: String::new(),
            images: vec![],
            variant: PromptVariant::Odometry,
        }
    }

    fn state(x: i32, y: i32, theta: Heading, target: PxPoint) -> WorldState {
        WorldState {
            pose: AgentPose {
                x,
                y,
                theta,
                radius: 10.0,
            },
            entity_phases: vec![],
            tick: 0,
            target,
        }
    }

    #[test]
    fn greedy_moves_toward_aligned_clear_target() {
        let scene = empty_scene();
        let s = state(300, 256, Heading::East, PxPoint::new(600, 256));
        let depth = cast_depth(&s, &scene, 90.0, 61);
        let prompt = dummy_prompt();
        let mut p = GreedyPolicy;
        let d = p.decide(&obs_fixture(&s, &scene, &depth, &prompt)).unwrap();
        assert_eq!(d.action, Action::Forward);
    }

    #[test]
    fn greedy_turns_right_from_north_to_east() {
        let scene = empty_scene();
        let s = state(300, 256, Heading::North, PxPoint::new(600, 256));
        let depth = cast_depth(&s, &scene, 90.0, 61);
        let prompt = dummy_prompt();
        let mut p = GreedyPolicy;
        let d = p.decide(&obs_fixture(&s, &scene, &depth, &prompt)).unwrap();
        assert_eq!(d.action, Action::TurnRight);
    }

    #[test]
    fn greedy_stops_inside_success_radius() {
        let scene = empty_scene();
        let s = state(300, 256, Heading::East, PxPoint::new(315, 256));
        let depth = cast_depth(&s, &scene, 90.0, 61);
        let prompt = dummy_prompt();
        let mut p = GreedyPolicy;
        let d = p.decide(&obs_fixture(&s, &scene, &depth, &prompt)).unwrap();
        assert_eq!(d.action, Action::Stop);
    }

    #[test]
    fn greedy_stop_iff_within_radius() {
        let scene = empty_scene();
        let prompt = dummy_prompt();
        let mut p = GreedyPolicy;
        for d in [5, 19, 20, 21, 40, 200] {
            let s = state(300, 256, Heading::East, PxPoint::new(300 + d, 256));
            let depth = cast_depth(&s, &scene, 90.0, 61);
            let got = p.decide(&obs_fixture(&s, &scene, &depth, &prompt)).unwrap();
            assert_eq!(
                got.action == Action::Stop,
                d as f64 <= 20.0,
                "distance {d}"
            );
        }
    }

    #[test]
    fn oracle_walks_straight_corridor() {
        let scene = empty_scene();
        let prompt = dummy_prompt();
        let mut p = OraclePolicy::new(&scene, 10.0);
        let s = state(300, 256, Heading::East, PxPoint::new(470, 256));
        let depth = cast_depth(&s, &scene, 90.0, 61);
        let d = p.decide(&obs_fixture(&s, &scene, &depth, &prompt)).unwrap();
        assert_eq!(d.action, Action::Forward);
    }
}
