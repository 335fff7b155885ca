use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::loss::{ppo_loss_and_grad, Batch, LossStats};
use super::network::{value_forward, PolicyParams};
use super::returns::{compute_gae, normalize_advantages};
use super::{PpoHyper, Trajectory};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: u64,
    m: PolicyParams,
    v: PolicyParams,
}

impl Adam {
    pub fn new(like: &PolicyParams) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: like.zeros_like(),
            v: like.zeros_like(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn apply(&mut self, params: &mut PolicyParams, grad: &PolicyParams, lr: f64) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        let p = params.tensors_mut();
        let m = self.m.tensors_mut();
        let v = self.v.tensors_mut();
        let g = grad.tensors();
        for (((p, m), v), g) in p.into_iter().zip(m).zip(v).zip(g) {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateStats {
    /// Loss statistics averaged over every minibatch step.
    pub mean: LossStats,
    /// Loss statistics of the very first minibatch, evaluated at the rollout parameters.
    pub first: LossStats,
    pub gradient_steps: usize,
    pub samples: usize,
}

/// Pools trajectories into one batch with GAE advantages (normalized) and value targets.
///
/// Transitions must carry rollout-time values; truncated trajectories bootstrap from
/// `params`' value of the final observation.
pub fn build_batch(trajectories: &[Trajectory], params: &PolicyParams, hyper: &PpoHyper) -> Result<Batch> {
    if trajectories.is_empty() {
        return Err(Error::Contract("no trajectories to learn from".into()));
    }
    let dim = params.obs_dim();
    let total: usize = trajectories.iter().map(Trajectory::len).sum();
    let mut obs = Array2::zeros((total, dim));
    let mut actions = Vec::with_capacity(total);
    let mut old_logp = Vec::with_capacity(total);
    let mut advantages = Vec::with_capacity(total);
    let mut targets = Vec::with_capacity(total);
    let mut row = 0;
    for traj in trajectories {
        if traj.is_empty() {
            return Err(Error::Contract(format!("trajectory of env {} is empty", traj.env_id)));
        }
        let rewards = traj.rewards();
        let values: Vec<f64> = traj.transitions.iter().map(|t| t.value).collect();
        let last = traj.transitions.last().expect("non-empty");
        let bootstrap = if last.terminal {
            0.0
        } else {
            value_forward(params, &traj.final_observation)?
        };
        let gae = compute_gae(&rewards, &values, bootstrap, hyper.gamma, hyper.gae_lambda)?;
        for (t, tr) in traj.transitions.iter().enumerate() {
            if tr.observation.len() != dim {
                return Err(Error::Contract(format!(
                    "observation has {} entries, network expects {dim}",
                    tr.observation.len()
                )));
            }
            obs.row_mut(row).assign(&ndarray::ArrayView1::from(&tr.observation[..]));
            actions.push(tr.action);
            old_logp.push(tr.log_prob);
            advantages.push(gae.advantages[t]);
            targets.push(gae.targets[t]);
            row += 1;
        }
    }
    normalize_advantages(&mut advantages);
    Ok(Batch {
        obs,
        actions,
        old_logp,
        advantages,
        targets,
    })
}

/// Single learner: owns the parameters, optimizer moments and minibatch shuffler.
#[derive(Debug, Clone)]
pub struct Learner {
    pub params: PolicyParams,
    pub hyper: PpoHyper,
    optimizer: Adam,
    rng: ChaCha8Rng,
}

impl Learner {
    pub fn new(params: PolicyParams, hyper: PpoHyper, seed: u64) -> Self {
        let optimizer = Adam::new(&params);
        Learner {
            params,
            hyper,
            optimizer,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn optimizer(&self) -> &Adam {
        &self.optimizer
    }

    /// Runs `epochs` passes of shuffled minibatch Adam steps on the pooled trajectories.
    ///
    /// On a non-finite gradient or parameter the learner is rolled back to its state before
    /// the call and the error names the epoch, minibatch and offending tensor.
    pub fn update(&mut self, trajectories: &[Trajectory]) -> Result<UpdateStats> {
        self.hyper.validate()?;
        let batch = build_batch(trajectories, &self.params, &self.hyper)?;
        let saved = (self.params.clone(), self.optimizer.clone());
        match self.run_epochs(&batch) {
            Ok(stats) => Ok(stats),
            Err(e) => {
                self.params = saved.0;
                self.optimizer = saved.1;
                Err(e)
            }
        }
    }

    fn run_epochs(&mut self, batch: &Batch) -> Result<UpdateStats> {
        let n = batch.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut stats = UpdateStats {
            samples: n,
            ..Default::default()
        };
        let mut acc = LossStats::default();
        for epoch in 0..self.hyper.epochs {
            order.shuffle(&mut self.rng);
            for (mb, rows) in order.chunks(self.hyper.minibatch_size).enumerate() {
                let minibatch = batch.select(rows);
                let (_, s, grad) = ppo_loss_and_grad(&minibatch, &self.params, &self.hyper)?;
                if let Some(t) = first_non_finite(&grad) {
                    return Err(Error::NonFiniteGradient(format!(
                        "epoch {epoch}, minibatch {mb}: gradient tensor {t} is not finite"
                    )));
                }
                if stats.gradient_steps == 0 {
                    stats.first = s;
                }
                self.optimizer.apply(&mut self.params, &grad, self.hyper.learning_rate);
                self.params.clamp_log_std();
                if let Some(t) = first_non_finite(&self.params) {
                    return Err(Error::NonFiniteGradient(format!(
                        "epoch {epoch}, minibatch {mb}: parameter tensor {t} became non-finite"
                    )));
                }
                acc.surrogate += s.surrogate;
                acc.value_loss += s.value_loss;
                acc.entropy += s.entropy;
                acc.clip_fraction += s.clip_fraction;
                acc.approx_kl += s.approx_kl;
                stats.gradient_steps += 1;
            }
        }
        let k = stats.gradient_steps.max(1) as f64;
        stats.mean = LossStats {
            surrogate: acc.surrogate / k,
            value_loss: acc.value_loss / k,
            entropy: acc.entropy / k,
            clip_fraction: acc.clip_fraction / k,
            approx_kl: acc.approx_kl / k,
        };
        Ok(stats)
    }
}

fn first_non_finite(p: &PolicyParams) -> Option<usize> {
    p.tensors().iter().position(|t| t.iter().any(|v| !v.is_finite()))
}

/// One update from fresh optimizer state; see [`Learner::update`] for the stateful form.
pub fn ppo_update(
    trajectories: &[Trajectory],
    params: &PolicyParams,
    hyper: &PpoHyper,
    seed: u64,
) -> Result<PolicyParams> {
    let mut learner = Learner::new(params.clone(), hyper.clone(), seed);
    learner.update(trajectories)?;
    Ok(learner.params)
}
