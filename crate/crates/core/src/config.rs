//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; blank lines and `#` comments are ignored. Unknown or repeated keys
//! are rejected. [`RunConfig::to_text`] writes every key in a fixed order and re-parses to an
//! equal configuration.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use crate::coupling::{shortest, IoMode, IoStrategy, SolverTemplate, MOCK_TEMPLATE};
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::orchestrator::{ExecutionMode, ParallelPlan};
use crate::ppo::PpoHyper;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Empty means the in-process surrogate.
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
    /// Template file; empty means [`MOCK_TEMPLATE`] rendered to `solver.cfg`.
    pub template: PathBuf,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            program: String::new(),
            args: Vec::new(),
            timeout: Duration::from_secs(60),
            template: PathBuf::new(),
        }
    }
}

impl SolverConfig {
    pub fn load_template(&self) -> Result<SolverTemplate> {
        if self.template.as_os_str().is_empty() {
            return Ok(SolverTemplate {
                text: MOCK_TEMPLATE.into(),
                target: "solver.cfg".into(),
            });
        }
        let text = std::fs::read_to_string(&self.template).map_err(|e| Error::io(&self.template, e))?;
        let target = self
            .template
            .file_name()
            .map(|n| PathBuf::from(n.to_string_lossy().trim_end_matches(".tpl")))
            .unwrap_or_else(|| "solver.cfg".into());
        Ok(SolverTemplate { text, target })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub hyper: PpoHyper,
    pub hidden: usize,
    pub plan: ParallelPlan,
    pub strategy: IoStrategy,
    pub seed: u64,
    pub episodes: usize,
    pub checkpoint_every: usize,
    pub keep_files: bool,
    pub out: PathBuf,
    pub solver: SolverConfig,
    pub grid: String,
    /// Environment-episodes per benchmark point; 0 picks the mode's default.
    pub bench_episodes: usize,
    pub repetitions: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            env: EnvConfig::default(),
            hyper: PpoHyper::default(),
            hidden: 512,
            plan: ParallelPlan::default(),
            strategy: IoStrategy::disabled(),
            seed: 0,
            episodes: 100,
            checkpoint_every: 50,
            keep_files: false,
            out: PathBuf::from("run"),
            solver: SolverConfig::default(),
            grid: "table1".into(),
            bench_episodes: 0,
            repetitions: 3,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| Error::config(key, format!("`{value}` is not valid: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(key, format!("`{value}` is not a boolean"))),
    }
}

impl RunConfig {
    /// Every key with its current value, in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let e = &self.env;
        let h = &self.hyper;
        let p = &self.plan;
        vec![
            ("growth_rate", shortest(e.growth_rate)),
            ("shedding_freq", shortest(e.shedding_freq)),
            ("saturation", shortest(e.saturation)),
            ("actuation_gain", shortest(e.actuation_gain)),
            ("drag_sensitivity", shortest(e.drag_sensitivity)),
            ("drag_base", shortest(e.drag_base)),
            ("drag_ref", shortest(e.drag_ref)),
            ("lift_gain", shortest(e.lift_gain)),
            ("smoothing", shortest(e.smoothing)),
            ("lift_weight", shortest(e.lift_weight)),
            ("max_jet_velocity", shortest(e.max_jet_velocity)),
            ("dt", shortest(e.dt)),
            ("steps_per_actuation", e.steps_per_actuation.to_string()),
            ("actuations_per_episode", e.actuations_per_episode.to_string()),
            ("obs_dim", e.obs_dim.to_string()),
            ("gamma", shortest(h.gamma)),
            ("gae_lambda", shortest(h.gae_lambda)),
            ("clip", shortest(h.clip)),
            ("learning_rate", shortest(h.learning_rate)),
            ("epochs", h.epochs.to_string()),
            ("minibatch_size", h.minibatch_size.to_string()),
            ("entropy_coef", shortest(h.entropy_coef)),
            ("value_coef", shortest(h.value_coef)),
            ("normalize_obs", h.normalize_obs.to_string()),
            ("hidden", self.hidden.to_string()),
            ("envs", p.n_envs.to_string()),
            ("ranks", p.n_ranks.to_string()),
            ("mode", p.mode.to_string()),
            ("serial_fraction", shortest(p.serial_fraction)),
            ("solver_unit_cost", shortest(p.solver_unit_cost)),
            ("update_cost", shortest(p.update_cost)),
            ("disk_bandwidth", shortest(p.disk_bandwidth)),
            ("cache_bytes", shortest(p.cache_bytes)),
            ("io", self.strategy.mode.to_string()),
            (
                "baseline_payload_bytes",
                self.strategy.baseline_payload_bytes.to_string(),
            ),
            (
                "optimized_payload_bytes",
                self.strategy.optimized_payload_bytes.to_string(),
            ),
            ("seed", self.seed.to_string()),
            ("episodes", self.episodes.to_string()),
            ("checkpoint_every", self.checkpoint_every.to_string()),
            ("keep_files", self.keep_files.to_string()),
            ("out", self.out.display().to_string()),
            ("solver_program", self.solver.program.clone()),
            ("solver_args", self.solver.args.join(" ")),
            ("solver_timeout_s", shortest(self.solver.timeout.as_secs_f64())),
            ("solver_template", self.solver.template.display().to_string()),
            ("grid", self.grid.clone()),
            ("bench_episodes", self.bench_episodes.to_string()),
            ("repetitions", self.repetitions.to_string()),
        ]
    }

    pub fn keys() -> Vec<&'static str> {
        RunConfig::default().entries().into_iter().map(|(k, _)| k).collect()
    }

    /// Assigns one key; unknown keys are a configuration error naming the key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let e = &mut self.env;
        let h = &mut self.hyper;
        let p = &mut self.plan;
        match key {
            "growth_rate" => e.growth_rate = parse(key, value)?,
            "shedding_freq" => e.shedding_freq = parse(key, value)?,
            "saturation" => e.saturation = parse(key, value)?,
            "actuation_gain" => e.actuation_gain = parse(key, value)?,
            "drag_sensitivity" => e.drag_sensitivity = parse(key, value)?,
            "drag_base" => e.drag_base = parse(key, value)?,
            "drag_ref" => e.drag_ref = parse(key, value)?,
            "lift_gain" => e.lift_gain = parse(key, value)?,
            "smoothing" => e.smoothing = parse(key, value)?,
            "lift_weight" => e.lift_weight = parse(key, value)?,
            "max_jet_velocity" => e.max_jet_velocity = parse(key, value)?,
            "dt" => e.dt = parse(key, value)?,
            "steps_per_actuation" => e.steps_per_actuation = parse(key, value)?,
            "actuations_per_episode" => e.actuations_per_episode = parse(key, value)?,
            "obs_dim" => e.obs_dim = parse(key, value)?,
            "gamma" => h.gamma = parse(key, value)?,
            "gae_lambda" => h.gae_lambda = parse(key, value)?,
            "clip" => h.clip = parse(key, value)?,
            "learning_rate" => h.learning_rate = parse(key, value)?,
            "epochs" => h.epochs = parse(key, value)?,
            "minibatch_size" => h.minibatch_size = parse(key, value)?,
            "entropy_coef" => h.entropy_coef = parse(key, value)?,
            "value_coef" => h.value_coef = parse(key, value)?,
            "normalize_obs" => h.normalize_obs = parse_bool(key, value)?,
            "hidden" => self.hidden = parse(key, value)?,
            "envs" => p.n_envs = parse(key, value)?,
            "ranks" => p.n_ranks = parse(key, value)?,
            "mode" => p.mode = value.parse::<ExecutionMode>()?,
            "serial_fraction" => p.serial_fraction = parse(key, value)?,
            "solver_unit_cost" => p.solver_unit_cost = parse(key, value)?,
            "update_cost" => p.update_cost = parse(key, value)?,
            "disk_bandwidth" => p.disk_bandwidth = parse(key, value)?,
            "cache_bytes" => p.cache_bytes = parse(key, value)?,
            "io" => self.strategy.mode = value.parse::<IoMode>()?,
            "baseline_payload_bytes" => self.strategy.baseline_payload_bytes = parse(key, value)?,
            "optimized_payload_bytes" => self.strategy.optimized_payload_bytes = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "episodes" => self.episodes = parse(key, value)?,
            "checkpoint_every" => self.checkpoint_every = parse(key, value)?,
            "keep_files" => self.keep_files = parse_bool(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "solver_program" => self.solver.program = value.to_owned(),
            "solver_args" => self.solver.args = value.split_whitespace().map(str::to_owned).collect(),
            "solver_timeout_s" => {
                let secs: f64 = parse(key, value)?;
                self.solver.timeout = Duration::try_from_secs_f64(secs)
                    .map_err(|e| Error::config(key, format!("`{value}` is not a duration: {e}")))?;
            }
            "solver_template" => self.solver.template = PathBuf::from(value),
            "grid" => self.grid = value.to_owned(),
            "bench_episodes" => self.bench_episodes = parse(key, value)?,
            "repetitions" => self.repetitions = parse(key, value)?,
            other => {
                return Err(Error::config(other, "unknown key"));
            }
        }
        Ok(())
    }

    /// Applies a document on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", n + 1), "expected `key = value`"))?;
            let key = key.trim();
            if !seen.insert(key.to_owned()) {
                return Err(Error::config(key, "given more than once"));
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.hyper.validate()?;
        self.plan.validate()?;
        if self.hidden == 0 {
            return Err(Error::config("hidden", "must be at least 1"));
        }
        if self.episodes == 0 {
            return Err(Error::config("episodes", "must be at least 1"));
        }
        if self.repetitions == 0 {
            return Err(Error::config("repetitions", "must be at least 1"));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
