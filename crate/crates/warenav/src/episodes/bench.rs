//! Batched benchmarking: every (policy, scene, pair) cell runs as an
//! independent episode, concurrently up to the configured parallelism.
//! Results land in slots indexed by cell, so aggregation order (and the
//! emitted CSV) is identical at any parallelism level.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::episodes::{run_episode, EpisodeConfig, PolicySpec, SensorConfig};
use crate::metrics::{aggregate_report_lenient, BenchReport, MetricsError, RunRecord};
use crate::protocol::PromptVariant;
use crate::world::SceneConfig;
use crate::{
    DEFAULT_AGENT_RADIUS_PX, DEFAULT_HISTORY_LEN, DEFAULT_MAX_STEPS, DEFAULT_SUCCESS_RADIUS_PX,
};

/// Bench-wide episode settings.
#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub max_steps: u32,
    pub success_radius_px: f64,
    pub history_len: usize,
    pub variant: PromptVariant,
    pub agent_radius: f64,
    pub sensors: SensorConfig,
    pub parallelism: usize,
    pub log_dir: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            max_steps: DEFAULT_MAX_STEPS,
            success_radius_px: DEFAULT_SUCCESS_RADIUS_PX,
            history_len: DEFAULT_HISTORY_LEN,
            variant: PromptVariant::Odometry,
            agent_radius: DEFAULT_AGENT_RADIUS_PX,
            sensors: SensorConfig::default(),
            parallelism: 1,
            log_dir: None,
        }
    }
}

/// A cell that aborted instead of completing.
#[derive(Clone, Debug)]
pub struct CellFailure {
    pub policy: String,
    pub scene: String,
    pub pair_index: usize,
    pub error: String,
}

/// Everything a bench produces.
#[derive(Clone, Debug)]
pub struct BenchOutcome {
    pub report: BenchReport,
    /// Completed runs per policy, in policy order, cells ordered by
    /// (scene, pair).
    pub runs: Vec<(String, Vec<RunRecord>)>,
    pub failures: Vec<CellFailure>,
}

/// Run the full scenes x pairs matrix for every policy.
pub fn run_bench(
    scenes: &[SceneConfig],
    policies: &[PolicySpec],
    cfg: &BenchConfig,
) -> Result<BenchOutcome, MetricsError> {
    // (policy index, scene index, pair index) per cell, in report order.
    let mut cells: Vec<(usize, usize, usize)> = Vec::new();
    for (pi, _) in policies.iter().enumerate() {
        for (si, scene) in scenes.iter().enumerate() {
            for pair in 0..scene.pairs.len() {
                cells.push((pi, si, pair));
            }
        }
    }

    let results: Mutex<Vec<Option<Result<RunRecord, CellFailure>>>> =
        Mutex::new(vec![None; cells.len()]);
    let next = AtomicUsize::new(0);
    let workers = cfg.parallelism.max(1).min(cells.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let _handle = scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= cells.len() {
                    break;
                }
                let (pi, si, pair) = cells[i];
                let mut episode = EpisodeConfig::new(scenes[si].clone(), pair, policies[pi].clone());
                episode.max_steps = cfg.max_steps;
                episode.success_radius_px = cfg.success_radius_px;
                episode.history_len = cfg.history_len;
                episode.variant = cfg.variant;
                episode.agent_radius = cfg.agent_radius;
                episode.sensors = cfg.sensors;
                episode.log_dir = cfg.log_dir.clone();
                let outcome = run_episode(&episode).map(|r| r.run).map_err(|e| CellFailure {
                    policy: policies[pi].name(),
                    scene: scenes[si].name.clone(),
                    pair_index: pair,
                    error: e.to_string(),
                });
                results.lock().unwrap()[i] = Some(outcome);
            });
        }
    });

    let slots = results.into_inner().unwrap();
    let expected_per_policy: usize = scenes.iter().map(|s| s.pairs.len()).sum();
    let mut runs: Vec<(String, Vec<RunRecord>)> = policies
        .iter()
        .map(|p| (p.name(), Vec::new()))
        .collect();
    let mut failures = Vec::new();
    for (idx, slot) in slots.into_iter().enumerate() {
        let (pi, _, _) = cells[idx];
        match slot.expect("every cell was executed") {
            Ok(run) => runs[pi].1.push(run),
            Err(failure) => failures.push(failure),
        }
    }

    let report = aggregate_report_lenient(&runs, cfg.success_radius_px, expected_per_policy)?;
    Ok(BenchOutcome {
        report,
        runs,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{generate_scene, GeneratorParams};

    fn scenes(n: u64) -> Vec<SceneConfig> {
        (0..n)
            .map(|i| generate_scene(900 + i, &GeneratorParams::default()).unwrap())
            .collect()
    }

    #[test]
    fn twelve_scenes_four_pairs_gives_48_runs() {
        let scenes = scenes(12);
        let outcome = run_bench(&scenes, &[PolicySpec::Greedy], &BenchConfig::default()).unwrap();
        assert_eq!(outcome.runs[0].1.len(), 48);
        assert_eq!(outcome.report.rows[0].completed, 48);
        assert_eq!(outcome.report.rows[0].expected, 48);
        assert!(outcome.failures.is_empty());
    }

    #[test]
    fn parallelism_does_not_change_the_report() {
        let scenes = scenes(2);
        let seq = run_bench(
            &scenes,
            &[PolicySpec::Greedy, PolicySpec::Oracle],
            &BenchConfig {
                parallelism: 1,
                ..BenchConfig::default()
            },
        )
        .unwrap();
        let par = run_bench(
            &scenes,
            &[PolicySpec::Greedy, PolicySpec::Oracle],
            &BenchConfig {
                parallelism: 8,
                ..BenchConfig::default()
            },
        )
        .unwrap();
        assert_eq!(seq.report, par.report);
        assert_eq!(
            seq.report.to_csv_string(),
            par.report.to_csv_string()
        );
    }
}
