use rand::Rng;
use rand_distr::StandardNormal;

/// ½·ln(2π)
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub fn log_prob(a: f64, mean: f64, log_std: f64) -> f64 {
    let z = (a - mean) * (-log_std).exp();
    -0.5 * z * z - log_std - HALF_LN_2PI
}

/// Differential entropy of the diagonal Gaussian, independent of the mean.
#[inline]
pub fn entropy(log_std: f64) -> f64 {
    log_std + 0.5 + HALF_LN_2PI
}

/// Draws `a ~ N(mean, exp(log_std)²)` and returns it with its log-density.
pub fn sample_action<R: Rng + ?Sized>(mean: f64, log_std: f64, rng: &mut R) -> (f64, f64) {
    let eps: f64 = rng.sample(StandardNormal);
    let a = mean + log_std.exp() * eps;
    (a, log_prob(a, mean, log_std))
}
