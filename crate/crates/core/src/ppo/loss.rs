use ndarray::{Array1, Array2};

use super::gaussian::{entropy, log_prob};
use super::network::PolicyParams;
use super::PpoHyper;
use crate::error::{Error, Result};

/// Flattened minibatch ready for a loss evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// One observation per row.
    pub obs: Array2<f64>,
    pub actions: Vec<f64>,
    /// Log-probabilities under the rollout policy.
    pub old_logp: Vec<f64>,
    pub advantages: Vec<f64>,
    pub targets: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn select(&self, rows: &[usize]) -> Batch {
        let pick = |v: &[f64]| rows.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Batch {
            obs: self.obs.select(ndarray::Axis(0), rows),
            actions: pick(&self.actions),
            old_logp: pick(&self.old_logp),
            advantages: pick(&self.advantages),
            targets: pick(&self.targets),
        }
    }

    fn validate(&self, obs_dim: usize) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Contract("empty batch".into()));
        }
        if self.obs.nrows() != n || self.old_logp.len() != n || self.advantages.len() != n || self.targets.len() != n {
            return Err(Error::Contract("batch columns have different lengths".into()));
        }
        if self.obs.ncols() != obs_dim {
            return Err(Error::Contract(format!(
                "batch observations have {} columns, network expects {obs_dim}",
                self.obs.ncols()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossStats {
    /// Mean clipped surrogate (the quantity PPO maximizes).
    pub surrogate: f64,
    pub value_loss: f64,
    pub entropy: f64,
    /// Fraction of samples whose ratio left `[1 − ε, 1 + ε]`.
    pub clip_fraction: f64,
    /// Mean of `(r − 1) − ln r`, a non-negative KL(old ‖ new) estimator.
    pub approx_kl: f64,
}

/// Mean of `min(r·Â, clip(r, 1 − ε, 1 + ε)·Â)` with `r = exp(new − old)`.
pub fn clipped_surrogate(new_logp: &[f64], old_logp: &[f64], advantages: &[f64], clip: f64) -> f64 {
    let n = new_logp.len();
    let total: f64 = (0..n)
        .map(|i| clipped_term((new_logp[i] - old_logp[i]).exp(), advantages[i], clip).0)
        .sum();
    total / n as f64
}

/// Returns the per-sample objective and whether the unclipped branch is active.
#[inline]
fn clipped_term(ratio: f64, adv: f64, clip: f64) -> (f64, bool) {
    let unclipped = ratio * adv;
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip) * adv;
    if unclipped <= clipped {
        (unclipped, true)
    } else {
        (clipped, false)
    }
}

/// Clipped PPO loss: `−surrogate + c_v · value MSE − c_e · entropy`.
pub fn ppo_loss(batch: &Batch, params: &PolicyParams, hyper: &PpoHyper) -> Result<(f64, LossStats)> {
    evaluate(batch, params, hyper, None)
}

/// Loss plus its exact gradient with respect to every parameter.
pub fn ppo_loss_and_grad(
    batch: &Batch,
    params: &PolicyParams,
    hyper: &PpoHyper,
) -> Result<(f64, LossStats, PolicyParams)> {
    let mut grad = params.zeros_like();
    let (loss, stats) = evaluate(batch, params, hyper, Some(&mut grad))?;
    Ok((loss, stats, grad))
}

fn evaluate(
    batch: &Batch,
    params: &PolicyParams,
    hyper: &PpoHyper,
    grad: Option<&mut PolicyParams>,
) -> Result<(f64, LossStats)> {
    batch.validate(params.obs_dim())?;
    let n = batch.len();
    let inv_n = 1.0 / n as f64;
    let eps = hyper.clip;
    let log_std = params.log_std;
    let inv_var = (-2.0 * log_std).exp();

    let (means, policy_cache) = params.policy.forward_batch(batch.obs.view());
    let (values, value_cache) = params.value.forward_batch(batch.obs.view());

    let mut surrogate = 0.0;
    let mut clipped = 0usize;
    let mut kl = 0.0;
    let mut d_mean = Array1::zeros(n);
    let mut d_log_std = 0.0;
    for i in 0..n {
        let a = batch.actions[i];
        let adv = batch.advantages[i];
        let logp = log_prob(a, means[i], log_std);
        let log_ratio = logp - batch.old_logp[i];
        let ratio = log_ratio.exp();
        let (term, active) = clipped_term(ratio, adv, eps);
        surrogate += term;
        if (ratio - 1.0).abs() > eps {
            clipped += 1;
        }
        kl += (ratio - 1.0) - log_ratio;

        // The gradient flows only when the unclipped branch attains the minimum.
        if active {
            let diff = a - means[i];
            let g = -inv_n * adv * ratio;
            d_mean[i] = g * diff * inv_var;
            d_log_std += g * (diff * diff * inv_var - 1.0);
        }
    }
    surrogate *= inv_n;

    let residual: Array1<f64> = &values - &Array1::from(batch.targets.clone());
    let value_loss = residual.mapv(|r| r * r).sum() * inv_n;
    let ent = entropy(log_std);
    let loss = -surrogate + hyper.value_coef * value_loss - hyper.entropy_coef * ent;

    if let Some(grad) = grad {
        params
            .policy
            .backward_batch(batch.obs.view(), &policy_cache, d_mean.view(), &mut grad.policy);
        let d_value = residual.mapv(|r| 2.0 * hyper.value_coef * inv_n * r);
        params
            .value
            .backward_batch(batch.obs.view(), &value_cache, d_value.view(), &mut grad.value);
        grad.log_std += d_log_std - hyper.entropy_coef;
    }

    Ok((
        loss,
        LossStats {
            surrogate,
            value_loss,
            entropy: ent,
            clip_fraction: clipped as f64 * inv_n,
            approx_kl: kl * inv_n,
        },
    ))
}
