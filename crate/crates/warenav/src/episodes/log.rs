//! JSONL episode logs: a versioned header line, one step record per line,
//! and an optional abort marker. Logs are complete enough to re-execute
//! the episode bit-exactly.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::episodes::{EpisodeConfig, SensorConfig, StepRecord};
use crate::protocol::PromptVariant;

pub const LOG_SCHEMA_VERSION: u32 = 1;

/// First line of every log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub version: u32,
    pub episode_id: String,
    pub scene_name: String,
    pub scene_digest: String,
    pub pair_index: usize,
    pub max_steps: u32,
    pub success_radius_px: f64,
    pub history_len: usize,
    pub variant: PromptVariant,
    pub policy: String,
    pub seed: u64,
    pub agent_radius: f64,
    pub sensors: SensorConfig,
    /// Digest over the fields above; replay refuses a tampered header.
    pub config_digest: String,
}

impl LogHeader {
    pub fn for_episode(cfg: &EpisodeConfig, policy_name: &str) -> Self {
        let mut header = Self {
            version: LOG_SCHEMA_VERSION,
            episode_id: cfg.episode_id(),
            scene_name: cfg.scene.name.clone(),
            scene_digest: crate::episodes::scene_digest(&cfg.scene),
            pair_index: cfg.pair_index,
            max_steps: cfg.max_steps,
            success_radius_px: cfg.success_radius_px,
            history_len: cfg.history_len,
            variant: cfg.variant,
            policy: policy_name.to_string(),
            seed: cfg.seed,
            agent_radius: cfg.agent_radius,
            sensors: cfg.sensors,
            config_digest: String::new(),
        };
        header.config_digest = header.digest();
        header
    }

    /// Digest over everything except `config_digest` itself.
    pub fn digest(&self) -> String {
        let mut clean = self.clone();
        clean.config_digest = String::new();
        let bytes = serde_json::to_vec(&clean).expect("header serializes");
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        format!("{:x}", hasher.finalize())
    }
}

/// Abort marker appended when a model client fails mid-episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbortInfo {
    pub step: u32,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LogLine {
    Header(LogHeader),
    Step(StepRecord),
    Abort(AbortInfo),
}

/// A parsed episode log.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub header: LogHeader,
    pub steps: Vec<StepRecord>,
    /// Present when the episode aborted; such logs are excluded from
    /// metrics and reported separately.
    pub abort: Option<AbortInfo>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("log schema version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("missing or malformed header line")]
    MissingHeader,
    #[error("malformed log line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("truncated final line; last valid step is {last_valid_step:?}")]
    Truncated { last_valid_step: Option<u32> },
}

/// Write a complete log: header, steps, optional abort marker.
pub fn write_log(
    path: &Path,
    header: &LogHeader,
    steps: &[StepRecord],
    abort: Option<AbortInfo>,
) -> std::io::Result<()> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    let header_line =
        serde_json::to_string(&LogLine::Header(header.clone())).expect("header serializes");
    writeln!(out, "{header_line}")?;
    for step in steps {
        let line =
            serde_json::to_string(&LogLine::Step(step.clone())).expect("step serializes");
        writeln!(out, "{line}")?;
    }
    if let Some(abort) = abort {
        let line = serde_json::to_string(&LogLine::Abort(abort)).expect("abort serializes");
        writeln!(out, "{line}")?;
    }
    out.flush()
}

/// Read a log back. A malformed final line is reported as truncation
/// (naming the last valid step); a malformed interior line is an error.
pub fn read_log(path: &Path) -> Result<EpisodeLog, LogError> {
    let text = fs::read_to_string(path)?;
    let mut header: Option<LogHeader> = None;
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut abort: Option<AbortInfo> = None;
    let lines: Vec<&str> = text.lines().collect();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Result<LogLine, _> = serde_json::from_str(line);
        let parsed = match parsed {
            Ok(p) => p,
            Err(e) => {
                if i == lines.len() - 1 {
                    return Err(LogError::Truncated {
                        last_valid_step: steps.last().map(|s| s.step),
                    });
                }
                return Err(LogError::Malformed {
                    line: i + 1,
                    message: e.to_string(),
                });
            }
        };
        match parsed {
            LogLine::Header(h) => {
                if h.version != LOG_SCHEMA_VERSION {
                    return Err(LogError::VersionMismatch {
                        found: h.version,
                        expected: LOG_SCHEMA_VERSION,
                    });
                }
                header = Some(h);
            }
            LogLine::Step(s) => steps.push(s),
            LogLine::Abort(a) => abort = Some(a),
        }
    }
    let header = header.ok_or(LogError::MissingHeader)?;
    Ok(EpisodeLog {
        header,
        steps,
        abort,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episodes::PolicySpec;
    use crate::world::{Difficulty, MapSpec, PxPoint, SceneConfig, StartTargetPair};
    use crate::dynamics::Heading;

    fn scene() -> SceneConfig {
        SceneConfig {
            name: "log-test".into(),
            seed: Some(1),
            map: MapSpec::default(),
            obstacles: vec![],
            entities: vec![],
            pairs: vec![StartTargetPair {
                start: PxPoint::new(100, 256),
                start_theta: Heading::East,
                target: PxPoint::new(400, 256),
                difficulty: Difficulty::Easy,
            }],
        }
    }

    #[test]
    fn log_round_trip_and_line_count() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = crate::episodes::EpisodeConfig::new(scene(), 0, PolicySpec::Greedy);
        cfg.log_dir = Some(dir.path().to_path_buf());
        let result = crate::episodes::run_episode(&cfg).unwrap();
        let path = result.log_path.unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().count() as u32,
            result.run.steps_taken + 1,
            "header plus one line per step"
        );

        let log = read_log(&path).unwrap();
        assert_eq!(log.steps.len() as u32, result.run.steps_taken);
        assert!(log.abort.is_none());
        assert_eq!(log.header.config_digest, log.header.digest());

        // Field-for-field identity through a second write.
        let copy = dir.path().join("copy.jsonl");
        write_log(&copy, &log.header, &log.steps, log.abort.clone()).unwrap();
        let log2 = read_log(&copy).unwrap();
        assert_eq!(log, log2);
    }

    #[test]
    fn truncated_final_line_reports_last_valid_step() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = crate::episodes::EpisodeConfig::new(scene(), 0, PolicySpec::Greedy);
        cfg.log_dir = Some(dir.path().to_path_buf());
        let result = crate::episodes::run_episode(&cfg).unwrap();
        let path = result.log_path.unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.truncate(text.len() - 20);
        std::fs::write(&path, text).unwrap();
        match read_log(&path) {
            Err(LogError::Truncated { last_valid_step }) => {
                assert_eq!(last_valid_step, Some(result.run.steps_taken - 2));
            }
            other => panic!("expected Truncated, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = crate::episodes::EpisodeConfig::new(scene(), 0, PolicySpec::Greedy);
        cfg.log_dir = Some(dir.path().to_path_buf());
        let path = crate::episodes::run_episode(&cfg)
            .unwrap()
            .log_path
            .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let bumped = text.replacen("\"version\":1", "\"version\":9", 1);
        std::fs::write(&path, bumped).unwrap();
        assert!(matches!(
            read_log(&path),
            Err(LogError::VersionMismatch { found: 9, .. })
        ));
    }
}
