//! File-based coupling between the learner and a solver process.
//!
//! Each actuation exchanges one [`ActuationBundle`] (probe readings plus the coefficient history
//! of the period) and one action file. Three strategies control what lands on disk:
//!
//! * `Baseline`: text probes, a CSV coefficient history and a zero-filled field dump that brings
//!   the bundle to `baseline_payload_bytes`.
//! * `Optimized`: a single binary `step.bin` padded to `optimized_payload_bytes`.
//! * `Disabled`: nothing is written; only valid for in-process benchmarking.

mod bundle;
mod external;
mod template;

pub use bundle::{bundle_dir, read_action, read_bundle, write_action, write_bundle, ACTION_MAGIC, BUNDLE_MAGIC};
pub use external::{
    run_external_actuation, run_mock_solver, ExternalOutcome, Launcher, MockSolverOptions, MOCK_TEMPLATE,
};
pub(crate) use external::{write_restart, RESTART_FILE};
pub use template::{placeholders, render_template, SolverTemplate, TemplateValue};

use std::fmt;
use std::str::FromStr;

use crate::env::StepRecord;
use crate::error::{Error, Result};

pub const DEFAULT_BASELINE_PAYLOAD: u64 = 5_242_880;
pub const DEFAULT_OPTIMIZED_PAYLOAD: u64 = 1_258_291;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IoMode {
    Baseline,
    Optimized,
    Disabled,
}

impl IoMode {
    pub const ALL: [IoMode; 3] = [IoMode::Baseline, IoMode::Optimized, IoMode::Disabled];

    pub fn label(self) -> &'static str {
        match self {
            IoMode::Baseline => "baseline",
            IoMode::Optimized => "optimized",
            IoMode::Disabled => "disabled",
        }
    }
}

impl fmt::Display for IoMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for IoMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(IoMode::Baseline),
            "optimized" => Ok(IoMode::Optimized),
            "disabled" | "io-disabled" => Ok(IoMode::Disabled),
            other => Err(Error::config(
                "io",
                format!("unknown strategy `{other}` (expected baseline, optimized or disabled)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IoStrategy {
    pub mode: IoMode,
    pub baseline_payload_bytes: u64,
    pub optimized_payload_bytes: u64,
}

impl IoStrategy {
    pub fn new(mode: IoMode) -> Self {
        IoStrategy {
            mode,
            baseline_payload_bytes: DEFAULT_BASELINE_PAYLOAD,
            optimized_payload_bytes: DEFAULT_OPTIMIZED_PAYLOAD,
        }
    }

    pub fn baseline() -> Self {
        Self::new(IoMode::Baseline)
    }

    pub fn optimized() -> Self {
        Self::new(IoMode::Optimized)
    }

    pub fn disabled() -> Self {
        Self::new(IoMode::Disabled)
    }

    pub fn with_mode(self, mode: IoMode) -> Self {
        IoStrategy { mode, ..self }
    }

    /// Bytes of one bundle on disk under this strategy.
    pub fn payload_bytes(&self) -> u64 {
        match self.mode {
            IoMode::Baseline => self.baseline_payload_bytes,
            IoMode::Optimized => self.optimized_payload_bytes,
            IoMode::Disabled => 0,
        }
    }

    /// Disk traffic per actuation: the solver writes the bundle and the learner reads it back.
    pub fn bytes_moved_per_actuation(&self) -> u64 {
        2 * self.payload_bytes()
    }

    /// Fractional size reduction of the optimized bundle relative to the baseline one.
    pub fn payload_reduction(&self) -> f64 {
        1.0 - self.optimized_payload_bytes as f64 / self.baseline_payload_bytes as f64
    }
}

impl Default for IoStrategy {
    fn default() -> Self {
        IoStrategy::disabled()
    }
}

/// Everything exchanged for one actuation period of one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuationBundle {
    pub episode: usize,
    pub actuation: usize,
    pub probes: Vec<f64>,
    pub rows: Vec<StepRecord>,
    pub jet_velocity: f64,
}

impl ActuationBundle {
    pub fn from_outcome(episode: usize, actuation: usize, out: &crate::env::ActuationOutcome) -> Self {
        ActuationBundle {
            episode,
            actuation,
            probes: out.observation.clone(),
            rows: out.records.clone(),
            jet_velocity: out.state.jet_velocity,
        }
    }

    pub fn check_counts(&self, config: &crate::env::EnvConfig) -> Result<()> {
        if self.probes.len() != config.obs_dim || self.rows.len() != config.steps_per_actuation {
            return Err(Error::Contract(format!(
                "bundle has {} probes and {} rows, expected {} and {}",
                self.probes.len(),
                self.rows.len(),
                config.obs_dim,
                config.steps_per_actuation
            )));
        }
        Ok(())
    }

    /// Value comparison treating the two signed zeros as distinct (text formats preserve them).
    pub fn bitwise_eq(&self, other: &ActuationBundle) -> bool {
        let same = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.episode == other.episode
            && self.actuation == other.actuation
            && self.probes.len() == other.probes.len()
            && self.rows.len() == other.rows.len()
            && self.probes.iter().zip(&other.probes).all(|(a, b)| same(*a, *b))
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| same(a.t, b.t) && same(a.cd, b.cd) && same(a.cl, b.cl))
            && same(self.jet_velocity, other.jet_velocity)
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn shortest(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_payload_reduction_is_76_percent() {
        let s = IoStrategy::optimized();
        let r = s.payload_reduction();
        assert!(r >= 0.76, "{r}");
        assert!((r - 0.76).abs() < 1e-6);
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!("Baseline".parse::<IoMode>().unwrap(), IoMode::Baseline);
        assert_eq!("disabled".parse::<IoMode>().unwrap(), IoMode::Disabled);
        assert!("zip".parse::<IoMode>().is_err());
        for m in IoMode::ALL {
            assert_eq!(m.label().parse::<IoMode>().unwrap(), m);
        }
    }

    #[test]
    fn shortest_round_trips() {
        for v in [
            0.4,
            1.0,
            -0.0,
            1e-300,
            123456.789,
            f64::MAX,
            f64::MIN_POSITIVE,
            1.0 / 3.0,
        ] {
            let s = shortest(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(shortest(0.4), "0.4");
    }
}
