//! Deterministic replay: re-execute a logged action sequence through the
//! simulator and recompute every counter. A clean log reproduces its
//! RunRecord exactly; any tampering surfaces as a divergence at a specific
//! step.

use thiserror::Error;

use crate::dynamics::{distance_to_target, step_world, Action, WorldState};
use crate::episodes::{scene_digest, EpisodeLog};
use crate::metrics::{RunRecord, Termination};
use crate::sensors::{cast_depth, detect_warning};
use crate::world::SceneConfig;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("scene digest mismatch: log was recorded against a different scene")]
    SceneDigestMismatch,
    #[error("pair index {index} out of range ({available} pairs)")]
    PairIndex { index: usize, available: usize },
    #[error("log steps are not contiguous at line for step {step}")]
    NonContiguous { step: u32 },
    #[error("replay diverged at step {step}: {detail}")]
    Divergence { step: u32, detail: String },
}

/// Re-execute the log against the scene and rebuild the RunRecord from
/// the recomputed counters.
pub fn replay(log: &EpisodeLog, scene: &SceneConfig) -> Result<RunRecord, ReplayError> {
    if log.header.scene_digest != scene_digest(scene) {
        return Err(ReplayError::SceneDigestMismatch);
    }
    if log.header.pair_index >= scene.pairs.len() {
        return Err(ReplayError::PairIndex {
            index: log.header.pair_index,
            available: scene.pairs.len(),
        });
    }
    let sensors = &log.header.sensors;
    let scale = scene.map.meters_per_pixel;
    let mut state = WorldState::initial(scene, log.header.pair_index, log.header.agent_radius);
    let initial_distance = distance_to_target(&state.pose, state.target);

    let mut steps_taken = 0u32;
    let mut forward_attempts = 0u32;
    let mut collisions = 0u32;
    let mut warning_steps = 0u32;
    let mut terminated_by = Termination::StepCap;

    for (i, rec) in log.steps.iter().enumerate() {
        if rec.step != i as u32 {
            return Err(ReplayError::NonContiguous { step: rec.step });
        }
        if rec.pose_before != state.pose {
            return Err(ReplayError::Divergence {
                step: rec.step,
                detail: format!(
                    "pose before: logged {:?}, replayed {:?}",
                    rec.pose_before, state.pose
                ),
            });
        }
        let (collided, warning);
        if rec.action == Action::Stop {
            collided = false;
            let depth = cast_depth(&state, scene, sensors.fov_deg, sensors.n_rays);
            warning = detect_warning(&depth, &sensors.warning, scale);
            terminated_by = Termination::StopAction;
        } else {
            let outcome = step_world(&state, rec.action, scene);
            if outcome.attempted_forward {
                forward_attempts += 1;
                if outcome.collided {
                    collisions += 1;
                }
            }
            collided = outcome.collided;
            state = outcome.state;
            let depth = cast_depth(&state, scene, sensors.fov_deg, sensors.n_rays);
            warning = detect_warning(&depth, &sensors.warning, scale);
        }
        steps_taken += 1;
        if warning {
            warning_steps += 1;
        }
        if rec.pose_after != state.pose {
            return Err(ReplayError::Divergence {
                step: rec.step,
                detail: format!(
                    "pose after: logged {:?}, replayed {:?}",
                    rec.pose_after, state.pose
                ),
            });
        }
        if rec.collided != collided {
            return Err(ReplayError::Divergence {
                step: rec.step,
                detail: format!("collided: logged {}, replayed {collided}", rec.collided),
            });
        }
        if rec.warning != warning {
            return Err(ReplayError::Divergence {
                step: rec.step,
                detail: format!("warning: logged {}, replayed {warning}", rec.warning),
            });
        }
    }

    let final_distance = distance_to_target(&state.pose, state.target);
    Ok(RunRecord::new(
        scene.name.clone(),
        log.header.pair_index,
        steps_taken,
        final_distance,
        initial_distance,
        collisions,
        forward_attempts,
        warning_steps,
        terminated_by,
    ))
}
