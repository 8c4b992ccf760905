//! The episode state machine: sense, prompt, decide, step, record.
//!
//! Each step renders the current observation, builds the prompt (text
//! always, images only for policies that consume them), obtains a
//! decision, applies it through the simulator, and records everything
//! needed for bit-exact replay. Episodes are independent sequential tasks;
//! the bench runner executes them concurrently over immutable scenes.

mod bench;
mod log;
mod replay;

pub use bench::{run_bench, BenchConfig, BenchOutcome, CellFailure};
pub use log::{
    read_log, write_log, AbortInfo, EpisodeLog, LogError, LogHeader, LOG_SCHEMA_VERSION,
};
pub use replay::{replay, ReplayError};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::{distance_to_target, step_world, Action, AgentPose, WorldState};
use crate::metrics::{RunRecord, Termination};
use crate::protocol::{
    build_prompt, build_prompt_text, GreedyPolicy, HistoryEntry, HistoryWindow, ModelClient,
    ModelEndpointConfig, ModelPolicy, Observation, OraclePolicy, ParseStatus, Policy, PolicyError,
    PromptBundle, PromptVariant,
};
use crate::sensors::{cast_depth, detect_warning, render_ego, render_topdown, EgoRenderConfig, WarningConfig};
use crate::world::SceneConfig;
use crate::{
    DEFAULT_AGENT_RADIUS_PX, DEFAULT_HISTORY_LEN, DEFAULT_MAX_STEPS, DEFAULT_SUCCESS_RADIUS_PX,
};

/// Sensor wiring shared by the runner and replay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub fov_deg: f64,
    pub n_rays: usize,
    pub warning: WarningConfig,
    pub ego: EgoRenderConfig,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            fov_deg: 90.0,
            n_rays: 121,
            warning: WarningConfig::default(),
            ego: EgoRenderConfig::default(),
        }
    }
}

/// Which policy drives an episode.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    Greedy,
    Oracle,
    Model(ModelEndpointConfig),
}

impl PolicySpec {
    pub fn name(&self) -> String {
        match self {
            PolicySpec::Greedy => "greedy".to_string(),
            PolicySpec::Oracle => "oracle".to_string(),
            PolicySpec::Model(cfg) => cfg.model_id.clone(),
        }
    }
}

/// Everything one episode needs.
#[derive(Clone, Debug)]
pub struct EpisodeConfig {
    pub scene: SceneConfig,
    pub pair_index: usize,
    pub max_steps: u32,
    pub success_radius_px: f64,
    pub history_len: usize,
    pub variant: PromptVariant,
    pub policy: PolicySpec,
    pub seed: u64,
    pub agent_radius: f64,
    pub sensors: SensorConfig,
    /// Directory for the JSONL episode log; no log is written when absent.
    pub log_dir: Option<PathBuf>,
    /// Directory for per-step PPM frames; frames are skipped when absent.
    pub frames_dir: Option<PathBuf>,
}

impl EpisodeConfig {
    pub fn new(scene: SceneConfig, pair_index: usize, policy: PolicySpec) -> Self {
        Self {
            scene,
            pair_index,
            max_steps: DEFAULT_MAX_STEPS,
            success_radius_px: DEFAULT_SUCCESS_RADIUS_PX,
            history_len: DEFAULT_HISTORY_LEN,
            variant: PromptVariant::Odometry,
            policy,
            seed: 0,
            agent_radius: DEFAULT_AGENT_RADIUS_PX,
            sensors: SensorConfig::default(),
            log_dir: None,
            frames_dir: None,
        }
    }

    /// File-system friendly identifier for logs and frames.
    pub fn episode_id(&self) -> String {
        let policy = self.policy.name().replace(['/', ':', ' '], "-");
        format!("{}_p{}_{}", self.scene.name, self.pair_index, policy)
    }
}

/// One executed step, as logged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u32,
    pub pose_before: AgentPose,
    pub action: Action,
    pub pose_after: AgentPose,
    pub distance_after: f64,
    pub collided: bool,
    /// Warning flag of the post-action state.
    pub warning: bool,
    /// An entity moved onto the agent this step (not a collision).
    pub entity_contact: bool,
    /// Absent for scripted policies.
    pub parse_status: Option<ParseStatus>,
    /// Digest of the prompt text the decision saw.
    pub prompt_hash: String,
    pub raw_response: Option<String>,
    /// Request body with image payloads elided; absent for scripted
    /// policies.
    pub raw_request: Option<String>,
    /// Zero for scripted policies so their logs are byte-reproducible.
    pub latency_ms: u64,
}

/// Outcome of a completed (non-aborted) episode.
#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub run: RunRecord,
    pub log_path: Option<PathBuf>,
    pub success: bool,
}

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("pair index {index} out of range ({available} pairs)")]
    PairIndex { index: usize, available: usize },
    #[error("failed to build model client: {0}")]
    Client(#[from] crate::protocol::ClientError),
    #[error("episode aborted at step {step}: {source}")]
    Aborted {
        step: u32,
        log_path: Option<PathBuf>,
        source: PolicyError,
    },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    format!("{:x}", hasher.finalize())
}

/// Digest of the canonical scene serialization; logs carry it so replay
/// can refuse a mismatched scene.
pub fn scene_digest(scene: &SceneConfig) -> String {
    sha256_hex(crate::world::serialize_scene(scene).as_bytes())
}

/// Run one episode with the configured policy.
pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeResult, EpisodeError> {
    let mut policy: Box<dyn Policy> = match &cfg.policy {
        PolicySpec::Greedy => Box::new(GreedyPolicy),
        PolicySpec::Oracle => Box::new(OraclePolicy::new(&cfg.scene, cfg.agent_radius)),
        PolicySpec::Model(endpoint) => {
            let client = ModelClient::new(endpoint.clone())?;
            Box::new(ModelPolicy::new(client, Action::TurnRight))
        }
    };
    run_episode_with(cfg, policy.as_mut())
}

/// Run one episode with an externally supplied policy (tests use this to
/// drive scripted action sequences).
pub fn run_episode_with(
    cfg: &EpisodeConfig,
    policy: &mut dyn Policy,
) -> Result<EpisodeResult, EpisodeError> {
    if cfg.pair_index >= cfg.scene.pairs.len() {
        return Err(EpisodeError::PairIndex {
            index: cfg.pair_index,
            available: cfg.scene.pairs.len(),
        });
    }
    let scene = &cfg.scene;
    let scale = scene.map.meters_per_pixel;
    let mut state = WorldState::initial(scene, cfg.pair_index, cfg.agent_radius);
    let initial_distance = distance_to_target(&state.pose, state.target);
    let mut history = HistoryWindow::new(cfg.history_len);
    let mut records: Vec<StepRecord> = Vec::new();

    let header = LogHeader::for_episode(cfg, policy.name());
    let episode_id = cfg.episode_id();
    if let Some(dir) = &cfg.frames_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut steps_taken = 0u32;
    let mut forward_attempts = 0u32;
    let mut collisions = 0u32;
    let mut warning_steps = 0u32;
    let mut terminated_by = Termination::StepCap;

    for step in 0..cfg.max_steps {
        let depth = cast_depth(&state, scene, cfg.sensors.fov_deg, cfg.sensors.n_rays);
        let text = build_prompt_text(
            &state,
            &history,
            cfg.variant,
            &Action::ALL,
            cfg.success_radius_px,
        );
        let prompt_hash = sha256_hex(text.as_bytes());
        let bundle = if policy.needs_images() {
            build_prompt(
                &state,
                scene,
                &history,
                cfg.variant,
                &Action::ALL,
                cfg.success_radius_px,
                &cfg.sensors.ego,
            )
        } else {
            PromptBundle {
                text,
                images: Vec::new(),
                variant: cfg.variant,
            }
        };
        if let Some(dir) = &cfg.frames_dir {
            let ego = render_ego(&state, scene, &cfg.sensors.ego);
            ego.save_ppm(&dir.join(format!("{episode_id}_{step}_ego.ppm")))?;
            let top = render_topdown(&state, scene);
            top.save_ppm(&dir.join(format!("{episode_id}_{step}_top.ppm")))?;
        }

        let obs = Observation {
            state: &state,
            scene,
            depth: &depth,
            success_radius_px: cfg.success_radius_px,
            prompt: &bundle,
        };
        let decision = match policy.decide(&obs) {
            Ok(d) => d,
            Err(source) => {
                let log_path = maybe_write_log(cfg, &header, &records, Some(AbortInfo {
                    step,
                    error: source.to_string(),
                }))?;
                return Err(EpisodeError::Aborted {
                    step,
                    log_path,
                    source,
                });
            }
        };

        let pose_before = state.pose;
        let distance_before = distance_to_target(&pose_before, state.target);

        let (pose_after, distance_after, collided, entity_contact, warning);
        if decision.action == Action::Stop {
            // Stop ends the episode in place; the post-action state is the
            // current state, so the already-cast depth applies.
            pose_after = pose_before;
            distance_after = distance_before;
            collided = false;
            entity_contact = false;
            warning = detect_warning(&depth, &cfg.sensors.warning, scale);
            terminated_by = Termination::StopAction;
        } else {
            let outcome = step_world(&state, decision.action, scene);
            if outcome.attempted_forward {
                forward_attempts += 1;
                if outcome.collided {
                    collisions += 1;
                }
            }
            collided = outcome.collided;
            entity_contact = outcome.entity_contact;
            state = outcome.state;
            pose_after = state.pose;
            distance_after = distance_to_target(&pose_after, state.target);
            let post_depth = cast_depth(&state, scene, cfg.sensors.fov_deg, cfg.sensors.n_rays);
            warning = detect_warning(&post_depth, &cfg.sensors.warning, scale);
        }
        steps_taken += 1;
        if warning {
            warning_steps += 1;
        }

        records.push(StepRecord {
            step,
            pose_before,
            action: decision.action,
            pose_after,
            distance_after,
            collided,
            warning,
            entity_contact,
            parse_status: decision.parse_status,
            prompt_hash,
            raw_response: decision.raw_response,
            raw_request: decision.raw_request,
            latency_ms: decision.latency_ms,
        });
        history.push(HistoryEntry {
            step,
            position: pose_before.position(),
            theta: pose_before.theta,
            action: decision.action,
            distance_px: distance_before,
            target: state.target,
        });

        if decision.action == Action::Stop {
            break;
        }
    }

    let final_distance = distance_to_target(&state.pose, state.target);
    let run = RunRecord::new(
        scene.name.clone(),
        cfg.pair_index,
        steps_taken,
        final_distance,
        initial_distance,
        collisions,
        forward_attempts,
        warning_steps,
        terminated_by,
    );
    let log_path = maybe_write_log(cfg, &header, &records, None)?;
    let success = final_distance <= cfg.success_radius_px;
    Ok(EpisodeResult {
        run,
        log_path,
        success,
    })
}

fn maybe_write_log(
    cfg: &EpisodeConfig,
    header: &LogHeader,
    records: &[StepRecord],
    abort: Option<AbortInfo>,
) -> Result<Option<PathBuf>, std::io::Error> {
    let Some(dir) = &cfg.log_dir else {
        return Ok(None);
    };
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.jsonl", cfg.episode_id()));
    write_log(&path, header, records, abort)?;
    Ok(Some(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::PolicyDecision;
    use crate::world::{
        Difficulty, HeightClass, MapSpec, Obstacle, ObstacleKind, PxPoint, PxRect, StartTargetPair,
    };
    use crate::dynamics::Heading;

    /// Replays a fixed action sequence, then stops.
    pub(crate) struct ScriptedPolicy {
        pub actions: Vec<Action>,
        pub cursor: usize,
    }

    impl Policy for ScriptedPolicy {
        fn name(&self) -> &str {
            "scripted"
        }

        fn decide(&mut self, _obs: &Observation<'_>) -> Result<PolicyDecision, PolicyError> {
            let action = self
                .actions
                .get(self.cursor)
                .copied()
                .unwrap_or(Action::Stop);
            self.cursor += 1;
            Ok(PolicyDecision {
                action,
                reasoning: None,
                raw_response: None,
                raw_request: None,
                parse_status: None,
                latency_ms: 0,
            })
        }
    }

    fn corridor_scene() -> SceneConfig {
        SceneConfig {
            name: "corridor".into(),
            seed: None,
            map: MapSpec::default(),
            obstacles: vec![],
            entities: vec![],
            pairs: vec![StartTargetPair {
                start: PxPoint::new(100, 256),
                start_theta: Heading::East,
                target: PxPoint::new(270, 256),
                difficulty: Difficulty::Easy,
            }],
        }
    }

    #[test]
    fn immediate_stop_within_radius_succeeds() {
        let mut scene = corridor_scene();
        scene.pairs[0].target = PxPoint::new(115, 256);
        let cfg = EpisodeConfig::new(scene, 0, PolicySpec::Greedy);
        let mut policy = ScriptedPolicy {
            actions: vec![Action::Stop],
            cursor: 0,
        };
        let result = run_episode_with(&cfg, &mut policy).unwrap();
        assert_eq!(result.run.steps_taken, 1);
        assert!(result.success);
        assert_eq!(result.run.terminated_by, Termination::StopAction);
    }

    #[test]
    fn greedy_corridor_takes_five_forwards_and_stop() {
        let cfg = EpisodeConfig::new(corridor_scene(), 0, PolicySpec::Greedy);
        let result = run_episode(&cfg).unwrap();
        assert_eq!(result.run.steps_taken, 6);
        assert_eq!(result.run.forward_attempts, 5);
        assert_eq!(result.run.collisions, 0);
        assert!(result.success);
    }

    #[test]
    fn forward_into_wall_hits_cap_with_all_collisions() {
        let mut scene = corridor_scene();
        scene.obstacles.push(Obstacle {
            id: "block".into(),
            kind: ObstacleKind::Shelf,
            height_class: HeightClass::Tall,
            color_id: 0,
            footprint: PxRect::new(120, 200, 40, 112),
        });
        scene.pairs[0].target = PxPoint::new(400, 256);
        let cfg = EpisodeConfig::new(scene, 0, PolicySpec::Greedy);
        let mut policy = ScriptedPolicy {
            actions: vec![Action::Forward; 200],
            cursor: 0,
        };
        let result = run_episode_with(&cfg, &mut policy).unwrap();
        assert_eq!(result.run.steps_taken, 70);
        assert_eq!(result.run.forward_attempts, 70);
        assert_eq!(result.run.collisions, 70);
        assert_eq!(result.run.final_distance, result.run.initial_distance);
        assert_eq!(result.run.terminated_by, Termination::StepCap);
    }

    #[test]
    fn runner_success_matches_metric_on_singleton() {
        let cfg = EpisodeConfig::new(corridor_scene(), 0, PolicySpec::Greedy);
        let result = run_episode(&cfg).unwrap();
        let sr = crate::metrics::compute_success_ratio(
            std::slice::from_ref(&result.run),
            cfg.success_radius_px,
        )
        .unwrap();
        assert_eq!(result.success, sr == 1.0);
    }

    #[test]
    fn pair_index_out_of_range_is_an_error() {
        let cfg = EpisodeConfig::new(corridor_scene(), 3, PolicySpec::Greedy);
        assert!(matches!(
            run_episode(&cfg),
            Err(EpisodeError::PairIndex { index: 3, .. })
        ));
    }
}
