//! Hybrid-parallel training driver.
//!
//! `N_envs` environments each run one episode against a shared policy snapshot, meet at a
//! barrier, and hand their trajectories to a single learner. Every environment may itself be
//! spread over `N_ranks` solver workers, so a run occupies `N_envs × N_ranks` cores.
//!
//! Timings come either from the wall clock ([`ExecutionMode::Real`]) or from a deterministic
//! cost model ([`ExecutionMode::Virtual`], see [`virtual_episode_time`]).

mod history;
mod training;

pub use history::{read_history, render_history_svg, summarize, DragSummary, HistoryRow};
pub use training::{
    run_training, run_training_with, EnvTiming, EpisodeReport, SolverBackend, TrainingOptions, TrainingRun,
    HISTORY_HEADER,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExecutionMode {
    Real,
    Virtual,
}

impl ExecutionMode {
    pub fn label(self) -> &'static str {
        match self {
            ExecutionMode::Real => "real",
            ExecutionMode::Virtual => "virtual",
        }
    }
}

impl fmt::Display for ExecutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ExecutionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(ExecutionMode::Real),
            "virtual" => Ok(ExecutionMode::Virtual),
            other => Err(Error::config("mode", format!("`{other}` is not one of real, virtual"))),
        }
    }
}

/// Resource layout and cost-model constants for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelPlan {
    pub n_envs: usize,
    pub n_ranks: usize,
    pub mode: ExecutionMode,
    /// Non-parallelizable share of one solver actuation.
    pub serial_fraction: f64,
    /// Seconds per actuation on a single rank.
    pub solver_unit_cost: f64,
    /// Seconds per learner update.
    pub update_cost: f64,
    /// Sustained disk bandwidth in bytes per second.
    pub disk_bandwidth: f64,
    /// Bytes per actuation the storage stack absorbs before contention sets in.
    pub cache_bytes: f64,
    pub available_cores: usize,
}

impl Default for ParallelPlan {
    fn default() -> Self {
        ParallelPlan {
            n_envs: 1,
            n_ranks: 1,
            mode: ExecutionMode::Virtual,
            serial_fraction: 0.3,
            solver_unit_cost: 2.7,
            update_cost: 1.0,
            disk_bandwidth: 200e6,
            cache_bytes: 200e6,
            available_cores: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl ParallelPlan {
    pub fn new(n_envs: usize, n_ranks: usize) -> Self {
        ParallelPlan {
            n_envs,
            n_ranks,
            ..Default::default()
        }
    }

    pub fn with_mode(mut self, mode: ExecutionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn total_cpus(&self) -> usize {
        self.n_envs * self.n_ranks
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_envs == 0 {
            return Err(Error::config("envs", "must be at least 1"));
        }
        if self.n_ranks == 0 {
            return Err(Error::config("ranks", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.serial_fraction) {
            return Err(Error::config("serial_fraction", "must lie in [0, 1]"));
        }
        for (key, v) in [
            ("solver_unit_cost", self.solver_unit_cost),
            ("update_cost", self.update_cost),
            ("cache_bytes", self.cache_bytes),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(key, "must be finite and non-negative"));
            }
        }
        if !(self.disk_bandwidth.is_finite() && self.disk_bandwidth > 0.0) {
            return Err(Error::config("disk_bandwidth", "must be positive"));
        }
        if self.mode == ExecutionMode::Real && self.total_cpus() > self.available_cores {
            return Err(Error::config(
                "envs",
                format!(
                    "{} envs x {} ranks needs {} cores, only {} available",
                    self.n_envs,
                    self.n_ranks,
                    self.total_cpus(),
                    self.available_cores
                ),
            ));
        }
        Ok(())
    }

    /// Amdahl time of one actuation on `n_ranks` workers.
    pub fn solver_time(&self) -> f64 {
        self.solver_unit_cost * (self.serial_fraction + (1.0 - self.serial_fraction) / self.n_ranks as f64)
    }

    /// Strong-scaling efficiency of the solver alone.
    pub fn solver_efficiency(&self) -> f64 {
        1.0 / (self.n_ranks as f64 * (self.serial_fraction + (1.0 - self.serial_fraction) / self.n_ranks as f64))
    }

    /// Time to move `bytes` per environment per actuation while all environments do the same.
    ///
    /// Each stream costs `bytes / B`; the aggregate beyond `cache_bytes` is serialized at `B`.
    pub fn io_time(&self, bytes: u64) -> Result<f64> {
        if bytes == 0 {
            return Ok(0.0);
        }
        if !(self.disk_bandwidth.is_finite() && self.disk_bandwidth > 0.0) {
            return Err(Error::config("disk_bandwidth", "must be positive when bytes are moved"));
        }
        let bytes = bytes as f64;
        let excess = (self.n_envs as f64 * bytes - self.cache_bytes).max(0.0);
        Ok((bytes + excess) / self.disk_bandwidth)
    }
}

/// Model timings of one training episode (all environments plus the update), in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VirtualTiming {
    pub solver_s: f64,
    pub io_s: f64,
    pub update_s: f64,
    /// Busy time of each environment; identical across environments in the model.
    pub env_s: f64,
    pub wall_s: f64,
}

/// Deterministic cost of one episode: `actuations · (T_s + T_io) + u`.
pub fn virtual_episode_time(plan: &ParallelPlan, bytes_per_actuation: u64, actuations: usize) -> Result<VirtualTiming> {
    let solver_s = actuations as f64 * plan.solver_time();
    let io_s = actuations as f64 * plan.io_time(bytes_per_actuation)?;
    let env_s = solver_s + io_s;
    Ok(VirtualTiming {
        solver_s,
        io_s,
        update_s: plan.update_cost,
        env_s,
        wall_s: env_s + plan.update_cost,
    })
}

/// Seed of environment `env_id`: the `(env_id + 1)`-th output of SplitMix64 seeded with `master`.
pub fn derive_env_seed(master: u64, env_id: usize) -> u64 {
    SplitMix64::new(master).nth(env_id).expect("SplitMix64 is infinite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn sixteen_ranks_fall_below_twenty_percent() {
        let e = ParallelPlan::new(1, 16).solver_efficiency();
        assert!((e - 1.0 / (16.0 * (0.3 + 0.7 / 16.0))).abs() < 1e-15);
        assert!(e < 0.20 && e > 0.18);
    }

    #[test]
    fn single_rank_costs_the_unit() {
        for f in [0.0, 0.3, 0.77, 1.0] {
            let plan = ParallelPlan {
                serial_fraction: f,
                ..ParallelPlan::new(1, 1)
            };
            assert_eq!(plan.solver_time(), plan.solver_unit_cost);
            assert_eq!(plan.solver_efficiency(), 1.0);
        }
    }

    #[test]
    fn zero_bytes_cost_nothing() {
        for n in [1, 8, 60, 1000] {
            assert_eq!(ParallelPlan::new(n, 1).io_time(0).unwrap(), 0.0);
        }
        let plan = ParallelPlan {
            disk_bandwidth: 0.0,
            ..ParallelPlan::new(4, 1)
        };
        assert_eq!(plan.io_time(0).unwrap(), 0.0);
        assert!(matches!(plan.io_time(1), Err(Error::Config { .. })));
    }

    #[test]
    fn io_is_flat_until_the_cache_fills() {
        let bytes = 10_485_760;
        let one = ParallelPlan::new(1, 1).io_time(bytes).unwrap();
        assert_eq!(one, bytes as f64 / 200e6);
        assert_eq!(ParallelPlan::new(19, 1).io_time(bytes).unwrap(), one);
        let sixty = ParallelPlan::new(60, 1).io_time(bytes).unwrap();
        assert!((sixty - (bytes as f64 + 60.0 * bytes as f64 - 200e6) / 200e6).abs() < 1e-12);
    }

    #[test]
    fn episode_time_composes_the_parts() {
        let plan = ParallelPlan::new(4, 2);
        let t = virtual_episode_time(&plan, 1000, 100).unwrap();
        let ts = 2.7 * (0.3 + 0.35);
        let tio = 1000.0 / 200e6;
        assert!((t.solver_s - 100.0 * ts).abs() < 1e-12);
        assert!((t.io_s - 100.0 * tio).abs() < 1e-15);
        assert!((t.wall_s - (100.0 * (ts + tio) + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn episode_time_is_monotone() {
        let base = virtual_episode_time(&ParallelPlan::new(30, 1), 5_000_000, 100)
            .unwrap()
            .wall_s;
        for ranks in 2..=16 {
            let prev = virtual_episode_time(&ParallelPlan::new(30, ranks - 1), 5_000_000, 100).unwrap();
            let next = virtual_episode_time(&ParallelPlan::new(30, ranks), 5_000_000, 100).unwrap();
            assert!(next.wall_s <= prev.wall_s);
        }
        let faster = ParallelPlan {
            disk_bandwidth: 400e6,
            ..ParallelPlan::new(30, 1)
        };
        assert!(virtual_episode_time(&faster, 5_000_000, 100).unwrap().wall_s <= base);
        let more = virtual_episode_time(&ParallelPlan::new(30, 1), 5_000_001, 100)
            .unwrap()
            .wall_s;
        assert!(more > base);
    }

    #[test]
    fn env_seeds_follow_the_stream() {
        let mut s = SplitMix64::new(99);
        assert_eq!(derive_env_seed(99, 0), s.next_u64());
        assert_eq!(derive_env_seed(99, 1), s.next_u64());
        assert_ne!(derive_env_seed(5, 0), derive_env_seed(5, 1));
        assert_eq!(derive_env_seed(5, 3), derive_env_seed(5, 3));
        let ids: HashSet<u64> = (0..10_000).map(|i| derive_env_seed(1, i)).collect();
        assert_eq!(ids.len(), 10_000);
    }

    #[test]
    fn validation_names_the_key() {
        assert!(matches!(ParallelPlan::new(0, 1).validate(), Err(Error::Config { key, .. }) if key == "envs"));
        assert!(matches!(ParallelPlan::new(1, 0).validate(), Err(Error::Config { key, .. }) if key == "ranks"));
        let greedy = ParallelPlan {
            available_cores: 4,
            ..ParallelPlan::new(4, 2).with_mode(ExecutionMode::Real)
        };
        assert!(greedy.validate().is_err());
        assert!(ParallelPlan {
            available_cores: 4,
            ..ParallelPlan::new(4, 2)
        }
        .validate()
        .is_ok());
    }
}
