//! The five evaluation metrics over per-run records, and benchmark report
//! aggregation.
//!
//! Success ratio: fraction of runs whose final target distance is within
//! the threshold. Distance ratio: mean fraction of the initial distance
//! eliminated. Average steps: mean executed steps. Collision ratio: mean
//! fraction of forward actions that were blocked. Warning ratio: mean
//! fraction of steps spent in a warning state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StopAction,
    StepCap,
}

/// Per-run counters; everything the metrics need.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scene: String,
    pub pair_index: usize,
    /// Executed steps, terminal stop included.
    pub steps_taken: u32,
    /// Distance to the target after the last executed action, px.
    pub final_distance: f64,
    /// Start-to-target distance, px.
    pub initial_distance: f64,
    /// Forward actions that were blocked.
    pub collisions: u32,
    /// Forward actions attempted (blocked or not).
    pub forward_attempts: u32,
    /// Steps whose post-action state raised the depth warning.
    pub warning_steps: u32,
    pub terminated_by: Termination,
}

impl RunRecord {
    /// Construct with the counter invariants checked.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        scene: String,
        pair_index: usize,
        steps_taken: u32,
        final_distance: f64,
        initial_distance: f64,
        collisions: u32,
        forward_attempts: u32,
        warning_steps: u32,
        terminated_by: Termination,
    ) -> Self {
        assert!(
            collisions <= forward_attempts && forward_attempts <= steps_taken,
            "counter invariant violated: C={collisions} F={forward_attempts} T={steps_taken}"
        );
        assert!(
            warning_steps <= steps_taken,
            "counter invariant violated: W={warning_steps} T={steps_taken}"
        );
        Self {
            scene,
            pair_index,
            steps_taken,
            final_distance,
            initial_distance,
            collisions,
            forward_attempts,
            warning_steps,
            terminated_by,
        }
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("metric over an empty run set")]
    EmptyRunSet,
    #[error("run {scene}[{pair_index}] has zero initial distance")]
    ZeroInitialDistance { scene: String, pair_index: usize },
    #[error("run {scene}[{pair_index}] has zero steps")]
    ZeroSteps { scene: String, pair_index: usize },
    #[error("model {model} is missing runs for: {}", missing.iter().map(|(s, p)| format!("{s}[{p}]")).collect::<Vec<_>>().join(", "))]
    MatrixMismatch {
        model: String,
        missing: Vec<(String, usize)>,
    },
}

fn non_empty(runs: &[RunRecord]) -> Result<(), MetricsError> {
    if runs.is_empty() {
        Err(MetricsError::EmptyRunSet)
    } else {
        Ok(())
    }
}

/// Fraction of runs with final distance within `success_radius`.
pub fn compute_success_ratio(
    runs: &[RunRecord],
    success_radius: f64,
) -> Result<f64, MetricsError> {
    non_empty(runs)?;
    let hits = runs
        .iter()
        .filter(|r| r.final_distance <= success_radius)
        .count();
    Ok(hits as f64 / runs.len() as f64)
}

/// Mean relative progress `(D - d) / D`; negative when a run ends farther
/// from the target than it started.
pub fn compute_distance_ratio(runs: &[RunRecord]) -> Result<f64, MetricsError> {
    non_empty(runs)?;
    let mut sum = 0.0;
    for r in runs {
        if r.initial_distance <= 0.0 {
            return Err(MetricsError::ZeroInitialDistance {
                scene: r.scene.clone(),
                pair_index: r.pair_index,
            });
        }
        sum += (r.initial_distance - r.final_distance) / r.initial_distance;
    }
    Ok(sum / runs.len() as f64)
}

/// Mean executed steps per run.
pub fn compute_average_steps(runs: &[RunRecord]) -> Result<f64, MetricsError> {
    non_empty(runs)?;
    Ok(runs.iter().map(|r| f64::from(r.steps_taken)).sum::<f64>() / runs.len() as f64)
}

/// Mean per-run collision fraction `C / F`. A run with no forward attempts
/// contributes 0 (no collision exposure).
pub fn compute_collision_ratio(runs: &[RunRecord]) -> Result<f64, MetricsError> {
    non_empty(runs)?;
    let sum: f64 = runs
        .iter()
        .map(|r| {
            if r.forward_attempts == 0 {
                0.0
            } else {
                f64::from(r.collisions) / f64::from(r.forward_attempts)
            }
        })
        .sum();
    Ok(sum / runs.len() as f64)
}

/// Mean per-run warning fraction `W / T`.
pub fn compute_warning_ratio(runs: &[RunRecord]) -> Result<f64, MetricsError> {
    non_empty(runs)?;
    let mut sum = 0.0;
    for r in runs {
        if r.steps_taken == 0 {
            return Err(MetricsError::ZeroSteps {
                scene: r.scene.clone(),
                pair_index: r.pair_index,
            });
        }
        sum += f64::from(r.warning_steps) / f64::from(r.steps_taken);
    }
    Ok(sum / runs.len() as f64)
}

/// One benchmark row: the five metrics for one model/policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub success_ratio: f64,
    pub distance_ratio: f64,
    pub average_steps: f64,
    pub collision_ratio: f64,
    pub warning_ratio: f64,
    /// Runs that completed and were scored.
    pub completed: usize,
    /// Runs the matrix called for.
    pub expected: usize,
}

/// Benchmark report across models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<ReportRow>,
    pub success_radius_px: f64,
}

impl BenchReport {
    /// Machine-readable CSV with the fixed header
    /// `model,sr,dr,as,cr,wr,n,delta`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("model,sr,dr,as,cr,wr,n,delta\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.4},{:.6},{:.6},{},{}\n",
                row.model,
                row.success_ratio,
                row.distance_ratio,
                row.average_steps,
                row.collision_ratio,
                row.warning_ratio,
                row.completed,
                self.success_radius_px
            ));
        }
        out
    }

    /// Aligned text table, ratios as percentages (2 decimals), column
    /// order SR, DR, AS, CR, WR.
    pub fn to_text_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "success threshold: {} px\n",
            self.success_radius_px
        ));
        out.push_str(&format!(
            "{:<28} {:>8} {:>8} {:>8} {:>8} {:>8} {:>10}\n",
            "model", "SR %", "DR %", "AS", "CR %", "WR %", "complete"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<28} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>7}/{}\n",
                r.model,
                r.success_ratio * 100.0,
                r.distance_ratio * 100.0,
                r.average_steps,
                r.collision_ratio * 100.0,
                r.warning_ratio * 100.0,
                r.completed,
                r.expected
            ));
        }
        out
    }
}

fn row_for(
    model: &str,
    runs: &[RunRecord],
    success_radius: f64,
    expected: usize,
) -> Result<ReportRow, MetricsError> {
    Ok(ReportRow {
        model: model.to_string(),
        success_ratio: compute_success_ratio(runs, success_radius)?,
        distance_ratio: compute_distance_ratio(runs)?,
        average_steps: compute_average_steps(runs)?,
        collision_ratio: compute_collision_ratio(runs)?,
        warning_ratio: compute_warning_ratio(runs)?,
        completed: runs.len(),
        expected,
    })
}

/// Aggregate one row per model. Every model must cover the same
/// (scene, pair) matrix; the error lists any missing cells.
pub fn aggregate_report(
    runs_by_model: &[(String, Vec<RunRecord>)],
    success_radius: f64,
) -> Result<BenchReport, MetricsError> {
    if runs_by_model.is_empty() {
        return Err(MetricsError::EmptyRunSet);
    }
    let mut matrix: Vec<(String, usize)> = runs_by_model[0]
        .1
        .iter()
        .map(|r| (r.scene.clone(), r.pair_index))
        .collect();
    matrix.sort();
    matrix.dedup();
    for (model, runs) in runs_by_model {
        let mut cells: Vec<(String, usize)> = runs
            .iter()
            .map(|r| (r.scene.clone(), r.pair_index))
            .collect();
        cells.sort();
        cells.dedup();
        let missing: Vec<(String, usize)> = matrix
            .iter()
            .filter(|c| !cells.contains(c))
            .cloned()
            .collect();
        let extra: Vec<(String, usize)> = cells
            .iter()
            .filter(|c| !matrix.contains(c))
            .cloned()
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            let mut all = missing;
            all.extend(extra);
            return Err(MetricsError::MatrixMismatch {
                model: model.clone(),
                missing: all,
            });
        }
    }
    let rows = runs_by_model
        .iter()
        .map(|(model, runs)| row_for(model, runs, success_radius, runs.len()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BenchReport {
        rows,
        success_radius_px: success_radius,
    })
}

/// Lenient aggregation for benches with aborted cells: each model is
/// scored over its completed runs, with the expected count recorded.
pub fn aggregate_report_lenient(
    runs_by_model: &[(String, Vec<RunRecord>)],
    success_radius: f64,
    expected_per_model: usize,
) -> Result<BenchReport, MetricsError> {
    let rows = runs_by_model
        .iter()
        .map(|(model, runs)| row_for(model, runs, success_radius, expected_per_model))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BenchReport {
        rows,
        success_radius_px: success_radius,
    })
}

/// RunRecords as CSV (one row per run).
pub fn run_records_to_csv(runs: &[RunRecord]) -> String {
    let mut out = String::from(
        "scene,pair,steps,final_distance,initial_distance,collisions,forwards,warnings,terminated_by\n",
    );
    for r in runs {
        out.push_str(&format!(
            "{},{},{},{:.4},{:.4},{},{},{},{}\n",
            r.scene,
            r.pair_index,
            r.steps_taken,
            r.final_distance,
            r.initial_distance,
            r.collisions,
            r.forward_attempts,
            r.warning_steps,
            match r.terminated_by {
                Termination::StopAction => "stop_action",
                Termination::StepCap => "step_cap",
            }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(
        scene: &str,
        pair: usize,
        t: u32,
        d: f64,
        d0: f64,
        c: u32,
        f: u32,
        w: u32,
    ) -> RunRecord {
        RunRecord::new(
            scene.to_string(),
            pair,
            t,
            d,
            d0,
            c,
            f,
            w,
            Termination::StepCap,
        )
    }

    #[test]
    fn success_counts_boundary_as_success() {
        let runs = vec![run("a", 0, 10, 20.0, 100.0, 0, 5, 0)];
        assert_eq!(compute_success_ratio(&runs, 20.0).unwrap(), 1.0);
        let runs = vec![
            run("a", 0, 10, 10.0, 100.0, 0, 5, 0),
            run("a", 1, 10, 30.0, 100.0, 0, 5, 0),
        ];
        assert_eq!(compute_success_ratio(&runs, 20.0).unwrap(), 0.5);
    }

    #[test]
    fn distance_ratio_allows_negative_progress() {
        let runs = vec![run("a", 0, 10, 120.0, 80.0, 0, 5, 0)];
        assert_eq!(compute_distance_ratio(&runs).unwrap(), -0.5);
        let runs = vec![run("a", 0, 10, 100.0, 100.0, 0, 5, 0)];
        assert_eq!(compute_distance_ratio(&runs).unwrap(), 0.0);
    }

    #[test]
    fn collision_ratio_degenerate_f_zero_is_zero() {
        let runs = vec![run("a", 0, 10, 50.0, 100.0, 0, 0, 0)];
        assert_eq!(compute_collision_ratio(&runs).unwrap(), 0.0);
        let runs = vec![run("a", 0, 10, 50.0, 100.0, 8, 8, 0)];
        assert_eq!(compute_collision_ratio(&runs).unwrap(), 1.0);
    }

    #[test]
    fn empty_run_set_is_an_error() {
        assert!(matches!(
            compute_average_steps(&[]),
            Err(MetricsError::EmptyRunSet)
        ));
    }

    #[test]
    fn matrix_mismatch_names_missing_cell() {
        let a = vec![run("s1", 0, 10, 5.0, 100.0, 0, 5, 0), run("s1", 1, 10, 5.0, 100.0, 0, 5, 0)];
        let b = vec![run("s1", 0, 10, 5.0, 100.0, 0, 5, 0)];
        let err = aggregate_report(
            &[("m1".to_string(), a), ("m2".to_string(), b)],
            20.0,
        )
        .unwrap_err();
        match err {
            MetricsError::MatrixMismatch { model, missing } => {
                assert_eq!(model, "m2");
                assert_eq!(missing, vec![("s1".to_string(), 1)]);
            }
            other => panic!("expected MatrixMismatch, got {other}"),
        }
    }

    #[test]
    fn identical_runs_give_identical_rows() {
        let runs = vec![run("s1", 0, 40, 10.0, 100.0, 2, 20, 4)];
        let report = aggregate_report(
            &[
                ("m1".to_string(), runs.clone()),
                ("m2".to_string(), runs),
            ],
            20.0,
        )
        .unwrap();
        assert_eq!(report.rows[0].success_ratio, report.rows[1].success_ratio);
        assert_eq!(report.rows[0].warning_ratio, report.rows[1].warning_ratio);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_run() -> impl Strategy<Value = RunRecord> {
            (1u32..=70, 0.0f64..400.0, 1.0f64..400.0, 0u32..=70, 0u32..=70)
                .prop_map(|(t, d, d0, c, f)| {
                    let f = f.min(t);
                    let c = c.min(f);
                    let w = t / 2;
                    run_fixture(t, d, d0, c, f, w)
                })
        }

        fn run_fixture(t: u32, d: f64, d0: f64, c: u32, f: u32, w: u32) -> RunRecord {
            RunRecord::new(
                "s".to_string(),
                0,
                t,
                d,
                d0,
                c,
                f,
                w,
                Termination::StepCap,
            )
        }

        proptest! {
            #[test]
            fn ratios_in_unit_interval(runs in proptest::collection::vec(arb_run(), 1..12)) {
                let sr = compute_success_ratio(&runs, 20.0).unwrap();
                let cr = compute_collision_ratio(&runs).unwrap();
                let wr = compute_warning_ratio(&runs).unwrap();
                prop_assert!((0.0..=1.0).contains(&sr));
                prop_assert!((0.0..=1.0).contains(&cr));
                prop_assert!((0.0..=1.0).contains(&wr));
            }

            #[test]
            fn sr_monotone_in_threshold(runs in proptest::collection::vec(arb_run(), 1..12), a in 0.0f64..100.0, b in 0.0f64..100.0) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let sr_lo = compute_success_ratio(&runs, lo).unwrap();
                let sr_hi = compute_success_ratio(&runs, hi).unwrap();
                prop_assert!(sr_lo <= sr_hi);
            }

            #[test]
            fn permutation_invariance(mut runs in proptest::collection::vec(arb_run(), 2..10)) {
                let before = (
                    compute_success_ratio(&runs, 20.0).unwrap(),
                    compute_distance_ratio(&runs).unwrap(),
                    compute_average_steps(&runs).unwrap(),
                    compute_collision_ratio(&runs).unwrap(),
                    compute_warning_ratio(&runs).unwrap(),
                );
                runs.reverse();
                let after = (
                    compute_success_ratio(&runs, 20.0).unwrap(),
                    compute_distance_ratio(&runs).unwrap(),
                    compute_average_steps(&runs).unwrap(),
                    compute_collision_ratio(&runs).unwrap(),
                    compute_warning_ratio(&runs).unwrap(),
                );
                prop_assert!((before.0 - after.0).abs() < 1e-12);
                prop_assert!((before.1 - after.1).abs() < 1e-12);
                prop_assert!((before.2 - after.2).abs() < 1e-12);
                prop_assert!((before.3 - after.3).abs() < 1e-12);
                prop_assert!((before.4 - after.4).abs() < 1e-12);
            }
        }
    }
}
