//! Prompt construction for the navigation agent.
//!
//! All variants share the coordinate-system block, the current state, the
//! action/dynamics table, the decision priority list, and the JSON output
//! instruction. The default variant adds the movement-history block; the
//! top-down variant additionally describes and attaches the minimap image.

use serde::{Deserialize, Serialize};

use crate::dynamics::{distance_to_target, Action, WorldState};
use crate::protocol::history::HistoryWindow;
use crate::sensors::{render_ego, render_topdown, EgoRenderConfig, Image};
use crate::world::SceneConfig;

/// Which prompt the agent receives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PromptVariant {
    /// Egocentric image + global odometry + history (the default).
    #[serde(rename = "odometry")]
    Odometry,
    /// Default prompt plus the top-down minimap image.
    #[serde(rename = "odometry+topdown")]
    OdometryTopdown,
    /// Default prompt with the movement-history block removed.
    #[serde(rename = "no-history")]
    NoHistory,
}

impl PromptVariant {
    pub fn name(self) -> &'static str {
        match self {
            PromptVariant::Odometry => "odometry",
            PromptVariant::OdometryTopdown => "odometry+topdown",
            PromptVariant::NoHistory => "no-history",
        }
    }
}

/// A rendered prompt: text plus the attached images (egocentric always,
/// top-down only in the minimap variant).
#[derive(Clone, Debug)]
pub struct PromptBundle {
    pub text: String,
    pub images: Vec<Image>,
    pub variant: PromptVariant,
}

/// Render the prompt text. Pure: identical inputs give identical bytes.
pub fn build_prompt_text(
    state: &WorldState,
    history: &HistoryWindow,
    variant: PromptVariant,
    allowed_actions: &[Action],
    success_radius_px: f64,
) -> String {
    let distance = distance_to_target(&state.pose, state.target);
    let allowed = allowed_actions
        .iter()
        .map(|a| a.name())
        .collect::<Vec<_>>()
        .join(", ");
    let delta = success_radius_px;

    let mut out = String::new();
    out.push_str(
        "You are a warehouse navigation agent. At each step, you receive an egocentric camera view and a compact state description. Your task is to reach the target while avoiding all obstacles.\n\n",
    );
    out.push_str("COORDINATE SYSTEM\n");
    out.push_str("- Map: +X = East (right), +Y = South (down), -X = West (left), -Y = North (up)\n");
    out.push_str("- Headings: θ = 0° → West, 90° → North, 180° → East, 270° → South\n\n");
    if variant == PromptVariant::OdometryTopdown {
        out.push_str("VISUAL INPUTS & MAPPING\n");
        out.push_str(
            "- Egocentric Camera Image: used to detect near-field obstacles and immediate collision risks.\n",
        );
        out.push_str(
            "- Top-Down Minimap Image: provides the global layout. The robot is a RED TRIANGLE (tip is facing direction). The target is a GREEN DOT.\n\n",
        );
    }
    out.push_str("CURRENT STATE\n");
    out.push_str(&format!(
        "- Position: ({}, {})\n",
        state.pose.x, state.pose.y
    ));
    out.push_str(&format!(
        "- Target: ({}, {})\n",
        state.target.x, state.target.y
    ));
    out.push_str(&format!(
        "- Distance to target: {} px\n",
        distance.round() as i64
    ));
    out.push_str(&format!("- Heading: {}°\n", state.pose.theta.degrees()));
    out.push_str(&format!("- Allowed actions: {allowed}\n\n"));
    if variant != PromptVariant::NoHistory {
        out.push_str("MOVEMENT HISTORY\n");
        out.push_str(&history.render_block());
        out.push_str("\n\n");
    }
    out.push_str("ACTIONS & DYNAMICS (Step size Δ = 34 px)\n");
    out.push_str("| Action     | Condition            | Effect               |\n");
    out.push_str("|------------|----------------------|----------------------|\n");
    out.push_str("| turn_right | -                    | θ = (θ + 90) mod 360 |\n");
    out.push_str("| turn_left  | -                    | θ = (θ - 90) mod 360 |\n");
    out.push_str("| forward    | heading 0° (West)    | x = x - 34           |\n");
    out.push_str("| forward    | heading 90° (North)  | y = y - 34           |\n");
    out.push_str("| forward    | heading 180° (East)  | x = x + 34           |\n");
    out.push_str("| forward    | heading 270° (South) | y = y + 34           |\n");
    out.push_str(&format!(
        "| stop       | distance ≤ {delta} px    | terminate episode    |\n\n"
    ));
    out.push_str("DECISION PRIORITY\n");
    out.push_str(
        "1. Check history. Review recent movements. Avoid repeating failed actions or getting stuck in loops.\n",
    );
    out.push_str(
        "2. Avoid obstacles first. Use the egocentric view. Never choose an action that collides with walls, shelves, robots, or other objects.\n",
    );
    out.push_str(
        "3. Reduce distance. Among safe actions, choose the one that moves closer to the target.\n",
    );
    out.push_str(
        "4. Make progress. If distance has not decreased in recent history, consider a different approach.\n",
    );
    out.push_str(&format!(
        "5. Stop. When within {delta} px of the target, choose stop.\n\n"
    ));
    out.push_str("OUTPUT (JSON only)\n");
    out.push_str("{\n");
    out.push_str("  \"reasoning\": \"Brief logic based on history and obstacles\",\n");
    out.push_str("  \"action\": \"<forward|turn_left|turn_right|stop>\"\n");
    out.push_str("}\n");
    out
}

/// Render the full prompt bundle, attaching the egocentric image and, in
/// the minimap variant, the top-down image.
pub fn build_prompt(
    state: &WorldState,
    scene: &SceneConfig,
    history: &HistoryWindow,
    variant: PromptVariant,
    allowed_actions: &[Action],
    success_radius_px: f64,
    ego_cfg: &EgoRenderConfig,
) -> PromptBundle {
    let text = build_prompt_text(state, history, variant, allowed_actions, success_radius_px);
    let mut images = vec![render_ego(state, scene, ego_cfg)];
    if variant == PromptVariant::OdometryTopdown {
        images.push(render_topdown(state, scene));
    }
    PromptBundle {
        text,
        images,
        variant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{AgentPose, Heading};
    use crate::protocol::history::HistoryEntry;
    use crate::world::{MapSpec, PxPoint};

    fn state() -> WorldState {
        WorldState {
            pose: AgentPose {
                x: 478,
                y: 214,
                theta: Heading::East,
                radius: 10.0,
            },
            entity_phases: vec![],
            tick: 0,
            target: PxPoint::new(812, 214),
        }
    }

    fn full_history() -> HistoryWindow {
        let mut w = HistoryWindow::new(10);
        for step in 0..12u32 {
            w.push(HistoryEntry {
                step,
                position: PxPoint::new(100 + 34 * step as i32, 214),
                theta: Heading::East,
                action: Action::Forward,
                distance_px: 712.0 - 34.0 * step as f64,
                target: PxPoint::new(812, 214),
            });
        }
        w
    }

    fn scene() -> SceneConfig {
        SceneConfig {
            name: "t".into(),
            seed: None,
            map: MapSpec::default(),
            obstacles: vec![],
            entities: vec![],
            pairs: vec![],
        }
    }

    #[test]
    fn default_variant_contains_required_sections() {
        let text = build_prompt_text(
            &state(),
            &full_history(),
            PromptVariant::Odometry,
            &Action::ALL,
            20.0,
        );
        assert!(text.contains("Headings: θ = 0° → West, 90° → North, 180° → East, 270° → South"));
        assert!(text.contains("ACTIONS & DYNAMICS (Step size Δ = 34 px)"));
        assert!(text.contains("MOVEMENT HISTORY"));
        let history_lines = text.lines().filter(|l| l.starts_with("Step ")).count();
        assert_eq!(history_lines, 10, "history is capped at ten lines");
    }

    #[test]
    fn no_history_variant_omits_block_only() {
        let with = build_prompt_text(
            &state(),
            &full_history(),
            PromptVariant::Odometry,
            &Action::ALL,
            20.0,
        );
        let without = build_prompt_text(
            &state(),
            &full_history(),
            PromptVariant::NoHistory,
            &Action::ALL,
            20.0,
        );
        assert!(!without.contains("MOVEMENT HISTORY"));
        // Everything outside the history block is identical.
        assert_eq!(
            with.split("ACTIONS & DYNAMICS").nth(1),
            without.split("ACTIONS & DYNAMICS").nth(1)
        );
        assert_eq!(
            with.split("MOVEMENT HISTORY").next(),
            without.split("ACTIONS & DYNAMICS").next()
        );
    }

    #[test]
    fn map_variant_attaches_two_images() {
        let bundle = build_prompt(
            &state(),
            &scene(),
            &full_history(),
            PromptVariant::OdometryTopdown,
            &Action::ALL,
            20.0,
            &EgoRenderConfig {
                width: 64,
                height: 64,
                fov_deg: 90.0,
            },
        );
        assert_eq!(bundle.images.len(), 2);
        assert!(bundle.text.contains("RED TRIANGLE"));
        assert_eq!(bundle.images[1].width, 1024);
        assert_eq!(bundle.images[1].height, 512);
    }

    #[test]
    fn prompt_text_is_pure() {
        let a = build_prompt_text(&state(), &full_history(), PromptVariant::Odometry, &Action::ALL, 20.0);
        let b = build_prompt_text(&state(), &full_history(), PromptVariant::Odometry, &Action::ALL, 20.0);
        assert_eq!(a, b);
    }
}
