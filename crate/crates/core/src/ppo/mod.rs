//! Proximal policy optimization for a scalar Gaussian action.
//!
//! Everything here is written against plain `ndarray` buffers with hand-derived backpropagation,
//! so gradients can be checked coordinate-by-coordinate against finite differences.

mod checkpoint;
mod gaussian;
mod loss;
mod network;
mod normalizer;
mod returns;
mod update;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use gaussian::{entropy, log_prob, sample_action};
pub use loss::{clipped_surrogate, ppo_loss, ppo_loss_and_grad, Batch, LossStats};
pub use network::{
    init_params, policy_forward, value_forward, Mlp, PolicyParams, LOG_STD_INIT, LOG_STD_MAX, LOG_STD_MIN,
};
pub use normalizer::ObsNormalizer;
pub use returns::{compute_gae, compute_returns, normalize_advantages, Advantages};
pub use update::{build_batch, ppo_update, Adam, Learner, UpdateStats};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PpoHyper {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Standardize observations with running statistics before the networks see them.
    pub normalize_obs: bool,
}

impl Default for PpoHyper {
    fn default() -> Self {
        PpoHyper {
            gamma: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            learning_rate: 3e-4,
            epochs: 10,
            minibatch_size: 100,
            entropy_coef: 0.01,
            value_coef: 0.5,
            normalize_obs: false,
        }
    }
}

impl PpoHyper {
    pub fn validate(&self) -> Result<()> {
        let unit = |key: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::config(key, format!("{v} is outside [0, 1]")))
            }
        };
        unit("gamma", self.gamma)?;
        unit("gae_lambda", self.gae_lambda)?;
        if !(self.clip > 0.0) {
            return Err(Error::config("clip", "must be positive"));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::config("learning_rate", "must be a finite non-negative number"));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if self.minibatch_size == 0 {
            return Err(Error::config("minibatch_size", "must be at least 1"));
        }
        if !(self.entropy_coef >= 0.0) {
            return Err(Error::config("entropy_coef", "must be non-negative"));
        }
        if !(self.value_coef >= 0.0) {
            return Err(Error::config("value_coef", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    /// Raw policy sample, before smoothing or clamping by the environment.
    pub action: f64,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    /// True environment termination. Fixed-length episodes end by truncation and leave this false.
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub env_id: usize,
    pub episode: usize,
    pub transitions: Vec<Transition>,
    /// Observation after the last action, used to bootstrap truncated episodes.
    pub final_observation: Vec<f64>,
}

impl Trajectory {
    pub fn new(
        env_id: usize,
        episode: usize,
        transitions: Vec<Transition>,
        final_observation: Vec<f64>,
        expected_len: usize,
    ) -> Result<Self> {
        if transitions.len() != expected_len {
            return Err(Error::Contract(format!(
                "trajectory has {} transitions, expected {expected_len}",
                transitions.len()
            )));
        }
        let dim = final_observation.len();
        for (i, t) in transitions.iter().enumerate() {
            if t.observation.len() != dim {
                return Err(Error::Contract(format!(
                    "transition {i} observation has {} entries, expected {dim}",
                    t.observation.len()
                )));
            }
            if !t.log_prob.is_finite() {
                return Err(Error::Contract(format!("transition {i} log-probability is not finite")));
            }
        }
        Ok(Trajectory {
            env_id,
            episode,
            transitions,
            final_observation,
        })
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.transitions.iter().map(|t| t.reward).collect()
    }

    pub fn total_reward(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }
}
