use crate::error::{Error, Result};

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Contract(format!("{name} = {v} is outside [0, 1]")))
    }
}

/// Finite-horizon discounted return-to-go for every step.
pub fn compute_returns(rewards: &[f64], gamma: f64) -> Result<Vec<f64>> {
    check_unit("gamma", gamma)?;
    if rewards.is_empty() {
        return Err(Error::Contract("rewards must be non-empty".into()));
    }
    let mut out = vec![0.0; rewards.len()];
    let mut running = 0.0;
    for (g, r) in out.iter_mut().zip(rewards).rev() {
        running = r + gamma * running;
        *g = running;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Advantages {
    pub advantages: Vec<f64>,
    /// Value-regression targets, `advantages + values` before any normalization.
    pub targets: Vec<f64>,
}

/// Generalized advantage estimation over one trajectory.
///
/// `bootstrap` is the value estimate of the state after the last step (0 for a true terminal).
/// Advantages are returned raw; see [`normalize_advantages`] for the per-batch standardization.
pub fn compute_gae(rewards: &[f64], values: &[f64], bootstrap: f64, gamma: f64, lambda: f64) -> Result<Advantages> {
    check_unit("gamma", gamma)?;
    check_unit("lambda", lambda)?;
    if rewards.len() != values.len() {
        return Err(Error::Contract(format!(
            "{} rewards but {} values",
            rewards.len(),
            values.len()
        )));
    }
    let n = rewards.len();
    let mut advantages = vec![0.0; n];
    let mut next_value = bootstrap;
    let mut running = 0.0;
    for t in (0..n).rev() {
        let delta = rewards[t] + gamma * next_value - values[t];
        running = delta + gamma * lambda * running;
        advantages[t] = running;
        next_value = values[t];
    }
    let targets = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok(Advantages { advantages, targets })
}

/// Standardizes to zero mean and unit variance; a constant batch maps to all zeros.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let scale = 1.0 / (var.sqrt() + 1e-8);
    for a in adv.iter_mut() {
        *a = (*a - mean) * scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn returns_examples() {
        assert_eq!(compute_returns(&[1.0, 1.0, 1.0], 1.0).unwrap(), [3.0, 2.0, 1.0]);
        assert_eq!(compute_returns(&[0.0, 0.0, 1.0], 0.5).unwrap(), [0.25, 0.5, 1.0]);
        assert!(compute_returns(&[1.0], 1.5).is_err());
        assert!(compute_returns(&[1.0], -0.1).is_err());
    }

    #[test]
    fn returns_recursion_holds_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = compute_returns(&r, 0.99).unwrap();
        for t in 0..49 {
            assert_eq!(g[t], r[t] + 0.99 * g[t + 1]);
        }
        assert_eq!(g[49], r[49]);
    }

    #[test]
    fn lambda_zero_is_td_error() {
        let r = [0.3, -0.1, 0.7, 0.2];
        let v = [1.0, 0.5, -0.2, 0.4];
        let out = compute_gae(&r, &v, 0.9, 0.95, 0.0).unwrap();
        let next = [0.5, -0.2, 0.4, 0.9];
        for t in 0..4 {
            assert_eq!(out.advantages[t], r[t] + 0.95 * next[t] - v[t]);
        }
    }

    #[test]
    fn telescoping_identity() {
        let r = [0.3, -0.1, 0.7, 0.2, 1.1];
        let v = [1.0, 0.5, -0.2, 0.4, 0.0];
        let out = compute_gae(&r, &v, 0.0, 1.0, 1.0).unwrap();
        let g = compute_returns(&r, 1.0).unwrap();
        for t in 0..5 {
            assert!((out.advantages[t] - (g[t] - v[t])).abs() < 1e-12);
            assert!((out.targets[t] - g[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(compute_gae(&[1.0, 2.0], &[1.0], 0.0, 0.9, 0.9).is_err());
    }

    #[test]
    fn normalization_guards_constant_batches() {
        let mut a = vec![0.0; 8];
        normalize_advantages(&mut a);
        assert!(a.iter().all(|&v| v == 0.0));
        let mut b = vec![1.0, 2.0, 3.0, 4.0];
        normalize_advantages(&mut b);
        let mean: f64 = b.iter().sum::<f64>() / 4.0;
        let var: f64 = b.iter().map(|x| x * x).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-7);
    }
}
