/// Running per-dimension mean/variance (Welford) for optional observation standardization.
///
/// Frozen during an episode: the orchestrator folds in a finished episode's observations only
/// after the barrier, so every environment sees the same transform.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsNormalizer {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
    pub clip: f64,
}

impl ObsNormalizer {
    pub fn new(dim: usize) -> Self {
        ObsNormalizer {
            count: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
            clip: 10.0,
        }
    }

    pub fn count(&self) -> f64 {
        self.count
    }

    pub fn observe(&mut self, x: &[f64]) {
        self.count += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / self.count;
            *s += d * (v - *m);
        }
    }

    pub fn variance(&self, i: usize) -> f64 {
        if self.count < 2.0 {
            1.0
        } else {
            self.m2[i] / self.count
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        if self.count < 2.0 {
            return x.to_vec();
        }
        x.iter()
            .enumerate()
            .map(|(i, v)| ((v - self.mean[i]) / (self.variance(i) + 1e-8).sqrt()).clamp(-self.clip, self.clip))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_two_pass_statistics() {
        let data: Vec<[f64; 2]> = (0..50).map(|i| [i as f64 * 0.3, (i as f64).sin()]).collect();
        let mut n = ObsNormalizer::new(2);
        for d in &data {
            n.observe(d);
        }
        for dim in 0..2 {
            let mean = data.iter().map(|d| d[dim]).sum::<f64>() / 50.0;
            let var = data.iter().map(|d| (d[dim] - mean).powi(2)).sum::<f64>() / 50.0;
            assert!((n.variance(dim) - var).abs() < 1e-10);
        }
        let z = n.apply(&[data[0][0], data[0][1]]);
        assert!(z.iter().all(|v| v.is_finite() && v.abs() <= 10.0));
    }

    #[test]
    fn identity_until_warm() {
        let n = ObsNormalizer::new(3);
        assert_eq!(n.apply(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
    }
}
