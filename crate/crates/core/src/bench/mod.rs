//! Scaling sweeps: timing records, speedup and efficiency against a declared reference, and
//! table/chart rendering.

mod reference;
mod report;

pub use reference::{reference_table1, reference_table2};
pub use report::{
    emit_report, read_breakdown_csv, read_records_csv, render_csv, render_markdown, render_strategy_markdown,
    render_svg, ReportFormat, BREAKDOWN_HEADER, CSV_HEADER,
};

use std::path::PathBuf;
use std::time::Instant;

use crate::coupling::{IoMode, IoStrategy};
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::orchestrator::{run_training, virtual_episode_time, ExecutionMode, ParallelPlan, TrainingOptions};
use crate::ppo::PpoHyper;

/// Wall time of one configuration, in hours.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    /// Environment-episodes completed (summed over environments).
    pub episodes: usize,
    pub n_envs: usize,
    pub n_ranks: usize,
    pub cpus: usize,
    pub hours: f64,
    pub solver_hours: f64,
    pub io_hours: f64,
    pub update_hours: f64,
    pub strategy: String,
    /// Set when the run did not complete; `hours` is then meaningless.
    pub failure: Option<String>,
}

impl TimingRecord {
    pub fn new(episodes: usize, n_envs: usize, n_ranks: usize, hours: f64, strategy: impl Into<String>) -> Self {
        TimingRecord {
            episodes,
            n_envs,
            n_ranks,
            cpus: n_envs * n_ranks,
            hours,
            solver_hours: 0.0,
            io_hours: 0.0,
            update_hours: 0.0,
            strategy: strategy.into(),
            failure: None,
        }
    }

    pub fn failed(episodes: usize, n_envs: usize, n_ranks: usize, strategy: impl Into<String>, why: String) -> Self {
        TimingRecord {
            failure: Some(why),
            ..TimingRecord::new(episodes, n_envs, n_ranks, f64::NAN, strategy)
        }
    }

    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    /// Hours left after solver, I/O and update work.
    pub fn idle_hours(&self) -> f64 {
        (self.hours - self.solver_hours - self.io_hours - self.update_hours).max(0.0)
    }

    fn hours_per_episode(&self) -> Result<f64> {
        if !(self.hours.is_finite() && self.hours > 0.0) || self.episodes == 0 {
            return Err(Error::Contract(format!(
                "record {} envs x {} ranks has no positive duration",
                self.n_envs, self.n_ranks
            )));
        }
        Ok(self.hours / self.episodes as f64)
    }
}

/// `T_ref / T_x`, with durations normalized per episode so unequal episode counts compare fairly.
pub fn speedup(reference: &TimingRecord, x: &TimingRecord) -> Result<f64> {
    Ok(reference.hours_per_episode()? / x.hours_per_episode()?)
}

/// `(T_ref · C_ref) / (T_x · C_x)` as a percentage.
pub fn efficiency(reference: &TimingRecord, x: &TimingRecord) -> Result<f64> {
    Ok(100.0 * speedup(reference, x)? * reference.cpus as f64 / x.cpus as f64)
}

/// Which record each row is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// The record with these counts and the row's own strategy.
    Fixed { n_envs: usize, n_ranks: usize },
    /// The smallest-`n_envs` record sharing the row's rank count and strategy.
    PerGroup,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub record: TimingRecord,
    /// Index of the reference row; `None` when no usable reference exists.
    pub reference: Option<usize>,
    pub speedup: Option<f64>,
    pub efficiency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
}

impl ScalingTable {
    pub fn new(records: Vec<TimingRecord>, reference: Reference) -> Self {
        let pick = |r: &TimingRecord| -> Option<usize> {
            let candidates = records
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_ok() && c.strategy == r.strategy);
            match reference {
                Reference::Fixed { n_envs, n_ranks } => candidates
                    .filter(|(_, c)| c.n_envs == n_envs && c.n_ranks == n_ranks)
                    .map(|(i, _)| i)
                    .next(),
                Reference::PerGroup => candidates
                    .filter(|(_, c)| c.n_ranks == r.n_ranks)
                    .min_by_key(|(i, c)| (c.n_envs, *i))
                    .map(|(i, _)| i),
            }
        };
        let rows = records
            .iter()
            .enumerate()
            .map(|(idx, r)| {
                let reference = pick(r);
                let (speedup, efficiency) = match reference {
                    Some(i) if i == idx => (Some(1.0), Some(100.0)),
                    Some(i) if r.is_ok() => (speedup(&records[i], r).ok(), efficiency(&records[i], r).ok()),
                    _ => (None, None),
                };
                ScalingRow {
                    record: r.clone(),
                    reference,
                    speedup,
                    efficiency,
                }
            })
            .collect();
        ScalingTable { rows }
    }

    pub fn records(&self) -> impl Iterator<Item = &TimingRecord> {
        self.rows.iter().map(|r| &r.record)
    }
}

/// One configuration of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub plan: ParallelPlan,
    pub strategy: IoStrategy,
}

pub const GRID_NAMES: [&str; 2] = ["table1", "table2"];

const TABLE1_GROUPS: [(usize, &[usize]); 3] = [
    (5, &[1, 2, 4, 6, 8, 10, 12]),
    (2, &[1, 2, 4, 6, 8, 10, 20, 30]),
    (1, &[1, 2, 4, 6, 8, 10, 20, 30, 40, 50, 60]),
];
const TABLE2_ENVS: [usize; 11] = [1, 2, 4, 6, 8, 10, 20, 30, 40, 50, 60];

/// Named configuration grid. `table1` runs under `strategy`; `table2` covers every strategy.
pub fn grid(name: &str, template: &ParallelPlan, strategy: &IoStrategy) -> Result<Vec<SweepPoint>> {
    let point = |envs: usize, ranks: usize, strategy: IoStrategy| SweepPoint {
        plan: ParallelPlan {
            n_envs: envs,
            n_ranks: ranks,
            ..template.clone()
        },
        strategy,
    };
    match name {
        "table1" => Ok(TABLE1_GROUPS
            .iter()
            .flat_map(|(ranks, envs)| envs.iter().map(|&e| point(e, *ranks, *strategy)))
            .collect()),
        "table2" => Ok(IoMode::ALL
            .iter()
            .flat_map(|&mode| TABLE2_ENVS.iter().map(move |&e| (e, mode)))
            .map(|(e, mode)| point(e, 1, (*strategy).with_mode(mode)))
            .collect()),
        other => Err(Error::config(
            "grid",
            format!("unknown grid `{other}`; available: {}", GRID_NAMES.join(", ")),
        )),
    }
}

/// Inputs shared by every point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Environment-episodes per point.
    pub episodes: usize,
    /// Real mode keeps the fastest of this many runs.
    pub repetitions: usize,
    pub env: EnvConfig,
    pub hyper: PpoHyper,
    pub seed: u64,
    /// Scratch root for Real-mode exchange files.
    pub scratch: Option<PathBuf>,
}

impl SweepSpec {
    pub fn virtual_default() -> Self {
        SweepSpec {
            episodes: 3000,
            repetitions: 1,
            env: EnvConfig::default(),
            hyper: PpoHyper::default(),
            seed: 0,
            scratch: None,
        }
    }

    pub fn real_default() -> Self {
        SweepSpec {
            episodes: 20,
            repetitions: 3,
            ..SweepSpec::virtual_default()
        }
    }
}

/// Model evaluation of one point; a pure function of its inputs.
pub fn virtual_record(point: &SweepPoint, episodes: usize, actuations: usize) -> Result<TimingRecord> {
    let plan = &point.plan;
    plan.validate()?;
    let t = virtual_episode_time(plan, point.strategy.bytes_moved_per_actuation(), actuations)?;
    let rounds = episodes as f64 / plan.n_envs as f64;
    let h = |s: f64| rounds * s / 3600.0;
    Ok(TimingRecord {
        solver_hours: h(t.solver_s),
        io_hours: h(t.io_s),
        update_hours: h(t.update_s),
        ..TimingRecord::new(
            episodes,
            plan.n_envs,
            plan.n_ranks,
            h(t.wall_s),
            point.strategy.mode.label(),
        )
    })
}

fn real_record(point: &SweepPoint, spec: &SweepSpec) -> Result<TimingRecord> {
    let plan = &point.plan;
    let rounds = (spec.episodes / plan.n_envs).max(1);
    let mut best: Option<TimingRecord> = None;
    for rep in 0..spec.repetitions.max(1) {
        let run_dir = spec.scratch.as_ref().map(|d| {
            d.join(format!(
                "{}_e{}_r{}_{rep}",
                point.strategy.mode.label(),
                plan.n_envs,
                plan.n_ranks
            ))
        });
        let opts = TrainingOptions {
            episodes: rounds,
            seed: spec.seed,
            strategy: point.strategy,
            run_dir: run_dir.clone(),
            checkpoint_every: 0,
            ..Default::default()
        };
        let started = Instant::now();
        let (reports, _) = run_training(plan, &spec.env, &spec.hyper, &opts)?.into_result()?;
        let hours = started.elapsed().as_secs_f64() / 3600.0;
        if let Some(dir) = run_dir {
            let _ = std::fs::remove_dir_all(dir);
        }
        let n = plan.n_envs as f64;
        let sum = |f: &dyn Fn(&crate::orchestrator::EnvTiming) -> f64| {
            reports.iter().flat_map(|r| r.env_timings.iter()).map(f).sum::<f64>() / n / 3600.0
        };
        let record = TimingRecord {
            solver_hours: sum(&|t| t.solver_s),
            io_hours: sum(&|t| t.io_s),
            update_hours: reports.iter().map(|r| r.update_s).sum::<f64>() / 3600.0,
            ..TimingRecord::new(
                rounds * plan.n_envs,
                plan.n_envs,
                plan.n_ranks,
                hours,
                point.strategy.mode.label(),
            )
        };
        if best.as_ref().is_none_or(|b| record.hours < b.hours) {
            best = Some(record);
        }
    }
    Ok(best.expect("at least one repetition"))
}

/// Runs every point in order. A failing point yields a failed record; the sweep goes on.
pub fn run_sweep(points: &[SweepPoint], spec: &SweepSpec) -> Vec<TimingRecord> {
    points
        .iter()
        .map(|p| {
            let outcome = match p.plan.mode {
                ExecutionMode::Virtual => virtual_record(p, spec.episodes, spec.env.actuations_per_episode),
                ExecutionMode::Real => real_record(p, spec),
            };
            outcome.unwrap_or_else(|e| {
                TimingRecord::failed(
                    spec.episodes,
                    p.plan.n_envs,
                    p.plan.n_ranks,
                    p.strategy.mode.label(),
                    e.to_string(),
                )
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(envs: usize, ranks: usize, hours: f64) -> TimingRecord {
        TimingRecord::new(3000, envs, ranks, hours, "baseline")
    }

    #[test]
    fn speedup_matches_measured_rows() {
        let s = speedup(&rec(1, 1, 225.2), &rec(60, 1, 7.6)).unwrap();
        assert!((s - 29.6).abs() < 0.05);
        let s = speedup(&rec(1, 5, 305.8), &rec(12, 5, 32.4)).unwrap();
        assert!((s - 9.4).abs() < 0.05);
        assert_eq!(speedup(&rec(1, 1, 3.0), &rec(1, 1, 3.0)).unwrap(), 1.0);
    }

    #[test]
    fn efficiency_matches_measured_rows() {
        let e = efficiency(&rec(1, 1, 225.2), &rec(60, 1, 7.6)).unwrap();
        assert!((e - 49.3).abs() < 0.1, "{e}");
        let e = efficiency(&rec(1, 5, 305.8), &rec(2, 5, 170.8)).unwrap();
        assert!((e - 89.5).abs() < 0.05, "{e}");
        assert_eq!(efficiency(&rec(1, 1, 3.0), &rec(1, 1, 3.0)).unwrap(), 100.0);
    }

    #[test]
    fn zero_duration_is_rejected() {
        assert!(speedup(&rec(1, 1, 0.0), &rec(2, 1, 1.0)).is_err());
        assert!(efficiency(&rec(1, 1, 1.0), &rec(2, 1, f64::NAN)).is_err());
    }

    #[test]
    fn per_group_reference_is_the_smallest_env_count() {
        let table = ScalingTable::new(
            vec![rec(2, 5, 170.8), rec(1, 5, 305.8), rec(1, 1, 225.2), rec(60, 1, 7.6)],
            Reference::PerGroup,
        );
        assert_eq!(table.rows[0].reference, Some(1));
        assert_eq!(table.rows[1].speedup, Some(1.0));
        assert_eq!(table.rows[1].efficiency, Some(100.0));
        assert_eq!(table.rows[3].reference, Some(2));
        let fixed = ScalingTable::new(
            table.records().cloned().collect(),
            Reference::Fixed { n_envs: 1, n_ranks: 1 },
        );
        assert_eq!(fixed.rows[0].reference, Some(2));
        let e = fixed.rows[0].efficiency.unwrap();
        assert!((e - 100.0 * 225.2 / (170.8 * 10.0)).abs() < 1e-9);
    }

    #[test]
    fn grids_have_the_expected_shape() {
        let t = ParallelPlan::default();
        let g1 = grid("table1", &t, &IoStrategy::baseline()).unwrap();
        assert_eq!(g1.len(), 26);
        assert!(g1.iter().all(|p| p.strategy.mode == IoMode::Baseline));
        let g2 = grid("table2", &t, &IoStrategy::baseline()).unwrap();
        assert_eq!(g2.len(), 33);
        for mode in IoMode::ALL {
            assert_eq!(g2.iter().filter(|p| p.strategy.mode == mode).count(), 11);
        }
        match grid("table9", &t, &IoStrategy::baseline()) {
            Err(Error::Config { detail, .. }) => assert!(detail.contains("table1") && detail.contains("table2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn virtual_sweeps_are_reproducible() {
        let points = grid("table2", &ParallelPlan::default(), &IoStrategy::baseline()).unwrap();
        let a = run_sweep(&points, &SweepSpec::virtual_default());
        let b = run_sweep(&points, &SweepSpec::virtual_default());
        assert_eq!(a, b);
        for r in &a {
            assert!(r.is_ok());
            assert!(r.solver_hours + r.io_hours + r.update_hours <= r.hours * (1.0 + 1e-12));
        }
    }

    #[test]
    fn disabled_io_scales_perfectly() {
        let points = grid("table2", &ParallelPlan::default(), &IoStrategy::baseline()).unwrap();
        let disabled: Vec<_> = points
            .into_iter()
            .filter(|p| p.strategy.mode == IoMode::Disabled)
            .collect();
        let table = ScalingTable::new(run_sweep(&disabled, &SweepSpec::virtual_default()), Reference::PerGroup);
        for row in &table.rows {
            assert!((row.efficiency.unwrap() - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn failed_points_do_not_stop_the_sweep() {
        let mut points = grid("table2", &ParallelPlan::default(), &IoStrategy::baseline()).unwrap();
        points[0].plan.n_ranks = 0;
        let records = run_sweep(&points[..3], &SweepSpec::virtual_default());
        assert!(records[0].failure.is_some());
        assert!(records[1].is_ok() && records[2].is_ok());
        let table = ScalingTable::new(records, Reference::PerGroup);
        assert_eq!(table.rows[0].speedup, None);
    }
}
