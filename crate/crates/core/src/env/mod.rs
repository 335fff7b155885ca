//! Desk-scale vortex-shedding environment.
//!
//! A Stuart–Landau oscillator stands in for the cylinder wake: its limit cycle is the shedding
//! cycle, lift follows `x`, and drag rises with the squared amplitude. A pair of synthetic jets
//! with zero net mass flux forces the `x` component.

mod sensors;

pub use sensors::{SensorMatrix, SENSOR_INPUTS, SENSOR_SEED};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

pub const OBS_DIM: usize = 149;

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    /// Linear growth rate σ.
    pub growth_rate: f64,
    /// Shedding angular frequency ω_s.
    pub shedding_freq: f64,
    /// Cubic saturation λ.
    pub saturation: f64,
    /// Gain of the jet forcing on the `x` equation.
    pub actuation_gain: f64,
    /// Drag sensitivity κ to the squared amplitude.
    pub drag_sensitivity: f64,
    pub drag_base: f64,
    /// Reference drag C_D,0 of the uncontrolled wake.
    pub drag_ref: f64,
    pub lift_gain: f64,
    /// Smoothing factor β in (0, 1].
    pub smoothing: f64,
    /// Lift penalty weight in the reward.
    pub lift_weight: f64,
    /// Jet velocity cap U_m.
    pub max_jet_velocity: f64,
    pub dt: f64,
    pub steps_per_actuation: usize,
    pub actuations_per_episode: usize,
    pub obs_dim: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            growth_rate: 2.0,
            shedding_freq: 4.0 * PI,
            saturation: 2.0,
            actuation_gain: 5.0,
            drag_sensitivity: 0.3,
            drag_base: 2.905,
            drag_ref: 3.205,
            lift_gain: 1.0,
            smoothing: 0.4,
            lift_weight: 0.1,
            // Mean inflow 1 with a parabolic profile peaks at 3/2.
            max_jet_velocity: 1.5,
            dt: 0.0005,
            steps_per_actuation: 50,
            actuations_per_episode: 100,
            obs_dim: OBS_DIM,
        }
    }
}

impl EnvConfig {
    pub fn limit_cycle_radius(&self) -> f64 {
        (self.growth_rate / self.saturation).sqrt()
    }

    pub fn shedding_period(&self) -> f64 {
        2.0 * PI / self.shedding_freq
    }

    pub fn actuation_period(&self) -> f64 {
        self.dt * self.steps_per_actuation as f64
    }

    pub fn episode_duration(&self) -> f64 {
        self.actuation_period() * self.actuations_per_episode as f64
    }

    /// Raw policy outputs are clamped to this magnitude before smoothing.
    pub fn max_raw_action(&self) -> f64 {
        3.0 * self.max_jet_velocity
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("growth_rate", self.growth_rate),
            ("saturation", self.saturation),
            ("max_jet_velocity", self.max_jet_velocity),
            ("dt", self.dt),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        let finite = [
            ("shedding_freq", self.shedding_freq),
            ("actuation_gain", self.actuation_gain),
            ("drag_sensitivity", self.drag_sensitivity),
            ("drag_base", self.drag_base),
            ("drag_ref", self.drag_ref),
            ("lift_gain", self.lift_gain),
            ("lift_weight", self.lift_weight),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        if !(self.smoothing > 0.0 && self.smoothing <= 1.0) {
            return Err(Error::config(
                "smoothing",
                format!("{} is outside (0, 1]", self.smoothing),
            ));
        }
        let calibrated = self.drag_base + self.drag_sensitivity * self.growth_rate / self.saturation;
        if (calibrated - self.drag_ref).abs() > 1e-9 * self.drag_ref.abs().max(1.0) {
            return Err(Error::config(
                "drag_base",
                format!(
                    "limit-cycle drag {calibrated} does not match drag_ref {}; set drag_base = drag_ref - drag_sensitivity * growth_rate / saturation",
                    self.drag_ref
                ),
            ));
        }
        for (key, v) in [
            ("steps_per_actuation", self.steps_per_actuation),
            ("actuations_per_episode", self.actuations_per_episode),
            ("obs_dim", self.obs_dim),
        ] {
            if v == 0 {
                return Err(Error::config(key, "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Sets `drag_base` from the calibration identity after changing the other drag terms.
    pub fn calibrate_drag_base(&mut self) {
        self.drag_base = self.drag_ref - self.drag_sensitivity * self.growth_rate / self.saturation;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateState {
    pub x: f64,
    pub y: f64,
    /// Smoothed jet-1 velocity currently applied.
    pub jet_velocity: f64,
    pub steps: u64,
    pub actuation: usize,
    pub rng: SplitMix64,
}

impl SurrogateState {
    pub fn time(&self, config: &EnvConfig) -> f64 {
        self.steps as f64 * config.dt
    }

    pub fn radius_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub cd: f64,
    pub cl: f64,
}

/// Places the oscillator on its uncontrolled limit cycle at a seeded uniform phase.
pub fn reset(config: &EnvConfig, seed: u64) -> (SurrogateState, Vec<f64>) {
    let mut rng = SplitMix64::new(seed);
    let phase = 2.0 * PI * rng.next_unit();
    let r = config.limit_cycle_radius();
    let state = SurrogateState {
        x: r * phase.cos(),
        y: r * phase.sin(),
        jet_velocity: 0.0,
        steps: 0,
        actuation: 0,
        rng,
    };
    let obs = observe(&state, config);
    (state, obs)
}

/// First-order smoothing of the jet velocity toward the raw action, capped at `±max`.
pub fn smooth_action(prev: f64, action: f64, beta: f64, max: f64) -> f64 {
    (prev + beta * (action - prev)).clamp(-max, max)
}

/// Opposed jet pair with zero net mass flux.
pub fn jet_velocities(v: f64) -> (f64, f64) {
    (v, -v)
}

#[inline]
fn derivative(x: f64, y: f64, forcing: f64, c: &EnvConfig) -> (f64, f64) {
    let r2 = x * x + y * y;
    let dx = c.growth_rate * x - c.shedding_freq * y - c.saturation * r2 * x + forcing;
    let dy = c.shedding_freq * x + c.growth_rate * y - c.saturation * r2 * y;
    (dx, dy)
}

/// One classical Runge–Kutta step with the jet held constant.
pub fn rk4_step(state: &SurrogateState, config: &EnvConfig) -> Result<SurrogateState> {
    let h = config.dt;
    let f = config.actuation_gain * state.jet_velocity;
    let (x, y) = (state.x, state.y);
    let (k1x, k1y) = derivative(x, y, f, config);
    let (k2x, k2y) = derivative(x + 0.5 * h * k1x, y + 0.5 * h * k1y, f, config);
    let (k3x, k3y) = derivative(x + 0.5 * h * k2x, y + 0.5 * h * k2y, f, config);
    let (k4x, k4y) = derivative(x + h * k3x, y + h * k3y, f, config);
    let nx = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    let ny = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    let mut next = state.clone();
    next.x = nx;
    next.y = ny;
    next.steps += 1;
    if !(nx.is_finite() && ny.is_finite()) {
        return Err(Error::Diverged {
            time: next.time(config),
            detail: format!("state became ({nx}, {ny})"),
        });
    }
    Ok(next)
}

/// Drag and lift readouts of the surrogate.
pub fn coefficients(state: &SurrogateState, config: &EnvConfig) -> (f64, f64) {
    let cd = config.drag_base + config.drag_sensitivity * state.radius_sq();
    let cl = config.lift_gain * state.x;
    (cd, cl)
}

/// `C_D,0 − ⟨C_D⟩ − w·|⟨C_L⟩|` over one actuation period, with `w` the lift weight.
pub fn compute_reward(records: &[StepRecord], config: &EnvConfig) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Contract("reward needs at least one step record".into()));
    }
    let n = records.len() as f64;
    let mean_cd = records.iter().map(|r| r.cd).sum::<f64>() / n;
    let mean_cl = records.iter().map(|r| r.cl).sum::<f64>() / n;
    Ok(config.drag_ref - mean_cd - config.lift_weight * mean_cl.abs())
}

/// Probe readings `M · [x, y, V_jet, C_D − C_D,0]`.
pub fn observe(state: &SurrogateState, config: &EnvConfig) -> Vec<f64> {
    if config.obs_dim == OBS_DIM {
        observe_with(state, config, SensorMatrix::standard())
    } else {
        observe_with(state, config, &SensorMatrix::generate(config.obs_dim, SENSOR_SEED))
    }
}

pub fn observe_with(state: &SurrogateState, config: &EnvConfig, sensors: &SensorMatrix) -> Vec<f64> {
    let (cd, _) = coefficients(state, config);
    sensors.apply(&[state.x, state.y, state.jet_velocity, cd - config.drag_ref])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActuationOutcome {
    pub state: SurrogateState,
    pub observation: Vec<f64>,
    pub reward: f64,
    pub records: Vec<StepRecord>,
    /// Whether a non-finite action was replaced by zero.
    pub sanitized: bool,
}

/// Jet velocity for the next period from a raw policy action.
///
/// Non-finite actions are replaced by zero (flagged in the second value) and the raw action is
/// clamped to [`EnvConfig::max_raw_action`] before smoothing.
pub fn jet_command(previous: f64, action: f64, config: &EnvConfig) -> (f64, bool) {
    let sanitized = !action.is_finite();
    let raw = if sanitized { 0.0 } else { action };
    let raw = raw.clamp(-config.max_raw_action(), config.max_raw_action());
    (
        smooth_action(previous, raw, config.smoothing, config.max_jet_velocity),
        sanitized,
    )
}

/// Holds one smoothed jet velocity for a full control period and integrates the surrogate.
pub fn actuate(state: &SurrogateState, action: f64, config: &EnvConfig) -> Result<ActuationOutcome> {
    let mut s = state.clone();
    let (jet, sanitized) = jet_command(s.jet_velocity, action, config);
    s.jet_velocity = jet;
    let mut records = Vec::with_capacity(config.steps_per_actuation);
    for _ in 0..config.steps_per_actuation {
        s = rk4_step(&s, config)?;
        let (cd, cl) = coefficients(&s, config);
        records.push(StepRecord {
            t: s.time(config),
            cd,
            cl,
        });
    }
    let reward = compute_reward(&records, config)?;
    s.actuation += 1;
    let observation = observe(&s, config);
    Ok(ActuationOutcome {
        state: s,
        observation,
        reward,
        records,
        sanitized,
    })
}

/// Environment instance owning its configuration, sensors and state.
#[derive(Debug, Clone)]
pub struct SurrogateEnv {
    config: EnvConfig,
    sensors: SensorMatrix,
    state: SurrogateState,
    sanitized_actions: usize,
}

impl SurrogateEnv {
    pub fn new(config: EnvConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let sensors = SensorMatrix::generate(config.obs_dim, SENSOR_SEED);
        let (state, _) = reset(&config, seed);
        Ok(SurrogateEnv {
            config,
            sensors,
            state,
            sanitized_actions: 0,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &SurrogateState {
        &self.state
    }

    pub fn sanitized_actions(&self) -> usize {
        self.sanitized_actions
    }

    pub fn reset(&mut self, seed: u64) -> Vec<f64> {
        let (state, _) = reset(&self.config, seed);
        self.state = state;
        self.observe()
    }

    pub fn observe(&self) -> Vec<f64> {
        observe_with(&self.state, &self.config, &self.sensors)
    }

    pub fn actuate(&mut self, action: f64) -> Result<ActuationOutcome> {
        let out = actuate(&self.state, action, &self.config)?;
        if out.sanitized {
            self.sanitized_actions += 1;
        }
        self.state = out.state.clone();
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
