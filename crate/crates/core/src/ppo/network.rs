use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
pub const LOG_STD_INIT: f64 = -0.5;

/// Two tanh hidden layers followed by a linear scalar head.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub w3: Array2<f64>,
    pub b3: Array1<f64>,
}

/// Activations kept from a batched forward pass for backpropagation.
pub(crate) struct MlpCache {
    h1: Array2<f64>,
    h2: Array2<f64>,
}

impl Mlp {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Mlp {
            w1: Array2::zeros((hidden, input)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((hidden, hidden)),
            b2: Array1::zeros(hidden),
            w3: Array2::zeros((1, hidden)),
            b3: Array1::zeros(1),
        }
    }

    fn init(input: usize, hidden: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut net = Mlp::zeros(input, hidden);
        for w in [&mut net.w1, &mut net.w2, &mut net.w3] {
            let scale = 1.0 / (w.ncols() as f64).sqrt();
            w.mapv_inplace(|_| truncated_normal(rng) * scale);
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn forward_one(&self, x: ArrayView1<'_, f64>) -> f64 {
        let mut h1 = self.w1.dot(&x) + &self.b1;
        h1.mapv_inplace(f64::tanh);
        let mut h2 = self.w2.dot(&h1) + &self.b2;
        h2.mapv_inplace(f64::tanh);
        self.w3.row(0).dot(&h2) + self.b3[0]
    }

    pub(crate) fn forward_batch(&self, x: ArrayView2<'_, f64>) -> (Array1<f64>, MlpCache) {
        let mut h1 = x.dot(&self.w1.t()) + &self.b1;
        h1.mapv_inplace(f64::tanh);
        let mut h2 = h1.dot(&self.w2.t()) + &self.b2;
        h2.mapv_inplace(f64::tanh);
        let out = h2.dot(&self.w3.row(0)) + self.b3[0];
        (out, MlpCache { h1, h2 })
    }

    /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output) per row.
    pub(crate) fn backward_batch(
        &self,
        x: ArrayView2<'_, f64>,
        cache: &MlpCache,
        d_out: ArrayView1<'_, f64>,
        grad: &mut Mlp,
    ) {
        let MlpCache { h1, h2 } = cache;
        grad.w3.row_mut(0).scaled_add(1.0, &d_out.dot(h2));
        grad.b3[0] += d_out.sum();

        let d_out_col = d_out.insert_axis(Axis(1));
        let mut dz2 = d_out_col.dot(&self.w3);
        dz2.zip_mut_with(h2, |d, &h| *d *= 1.0 - h * h);
        grad.w2.scaled_add(1.0, &dz2.t().dot(h1));
        grad.b2.scaled_add(1.0, &dz2.sum_axis(Axis(0)));

        let mut dz1 = dz2.dot(&self.w2);
        dz1.zip_mut_with(h1, |d, &h| *d *= 1.0 - h * h);
        grad.w1.scaled_add(1.0, &dz1.t().dot(&x));
        grad.b1.scaled_add(1.0, &dz1.sum_axis(Axis(0)));
    }

    fn slices(&self) -> [&[f64]; 6] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.b2.as_slice().expect("standard layout"),
            self.w3.as_slice().expect("standard layout"),
            self.b3.as_slice().expect("standard layout"),
        ]
    }

    fn slices_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
            self.w3.as_slice_mut().expect("standard layout"),
            self.b3.as_slice_mut().expect("standard layout"),
        ]
    }

    fn shapes(&self) -> [Vec<usize>; 6] {
        [
            self.w1.shape().to_vec(),
            self.b1.shape().to_vec(),
            self.w2.shape().to_vec(),
            self.b2.shape().to_vec(),
            self.w3.shape().to_vec(),
            self.b3.shape().to_vec(),
        ]
    }
}

/// Standard normal rejected beyond three standard deviations.
fn truncated_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        if z.abs() <= 3.0 {
            return z;
        }
    }
}

/// Policy and value networks plus the state-independent action log-std.
///
/// The same type doubles as the gradient and optimizer-moment container, so every tensor walk
/// (Adam, checkpointing, finite-difference checks) goes through [`PolicyParams::tensors`] and its
/// fixed order: policy `w1 b1 w2 b2 w3 b3`, `log_std`, value `w1 b1 w2 b2 w3 b3`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub policy: Mlp,
    pub log_std: f64,
    pub value: Mlp,
}

pub const TENSOR_COUNT: usize = 13;

impl PolicyParams {
    pub fn init(obs_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = Mlp::init(obs_dim, hidden, &mut rng);
        let value = Mlp::init(obs_dim, hidden, &mut rng);
        PolicyParams {
            policy,
            log_std: LOG_STD_INIT,
            value,
        }
    }

    pub fn zeros(obs_dim: usize, hidden: usize) -> Self {
        PolicyParams {
            policy: Mlp::zeros(obs_dim, hidden),
            log_std: 0.0,
            value: Mlp::zeros(obs_dim, hidden),
        }
    }

    pub fn zeros_like(&self) -> Self {
        PolicyParams::zeros(self.obs_dim(), self.hidden_dim())
    }

    pub fn obs_dim(&self) -> usize {
        self.policy.input_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.policy.hidden_dim()
    }

    pub fn tensors(&self) -> [&[f64]; TENSOR_COUNT] {
        let [a, b, c, d, e, f] = self.policy.slices();
        let [g, h, i, j, k, l] = self.value.slices();
        [a, b, c, d, e, f, std::slice::from_ref(&self.log_std), g, h, i, j, k, l]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; TENSOR_COUNT] {
        let log_std = std::slice::from_mut(&mut self.log_std);
        let [a, b, c, d, e, f] = self.policy.slices_mut();
        let [g, h, i, j, k, l] = self.value.slices_mut();
        [a, b, c, d, e, f, log_std, g, h, i, j, k, l]
    }

    pub fn shapes(&self) -> [Vec<usize>; TENSOR_COUNT] {
        let [a, b, c, d, e, f] = self.policy.shapes();
        let [g, h, i, j, k, l] = self.value.shapes();
        [a, b, c, d, e, f, Vec::new(), g, h, i, j, k, l]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn norm_sq(&self) -> f64 {
        self.tensors().iter().flat_map(|t| t.iter()).map(|v| v * v).sum()
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub(crate) fn clamp_log_std(&mut self) {
        self.log_std = self.log_std.clamp(LOG_STD_MIN, LOG_STD_MAX);
    }
}

/// Default-size parameters: 149 observations, two hidden layers of 512.
pub fn init_params(seed: u64) -> PolicyParams {
    PolicyParams::init(crate::env::OBS_DIM, 512, seed)
}

/// Gaussian mean and log-std of the policy at one observation.
pub fn policy_forward(params: &PolicyParams, obs: &[f64]) -> Result<(f64, f64)> {
    if obs.len() != params.obs_dim() {
        return Err(Error::Contract(format!(
            "observation has {} entries, network expects {}",
            obs.len(),
            params.obs_dim()
        )));
    }
    if let Some(i) = obs.iter().position(|v| !v.is_finite()) {
        return Err(Error::Contract(format!("observation entry {i} is not finite")));
    }
    let mean = params.policy.forward_one(ArrayView1::from(obs));
    Ok((mean, params.log_std))
}

pub fn value_forward(params: &PolicyParams, obs: &[f64]) -> Result<f64> {
    if obs.len() != params.obs_dim() {
        return Err(Error::Contract(format!(
            "observation has {} entries, network expects {}",
            obs.len(),
            params.obs_dim()
        )));
    }
    Ok(params.value.forward_one(ArrayView1::from(obs)))
}
