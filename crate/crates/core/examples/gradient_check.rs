//! Compares the analytic PPO loss gradient with central finite differences.
//!
//! ```text
//! cargo run --example gradient_check
//! ```

use afc_drl::ppo::{log_prob, policy_forward, ppo_loss, ppo_loss_and_grad, Batch, PolicyParams, PpoHyper};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> afc_drl::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = PolicyParams::init(5, 6, 3);
    let n = 10;
    let obs = Array2::from_shape_fn((n, 5), |_| rng.random_range(-1.0..1.0));
    let actions: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut old_logp = Vec::with_capacity(n);
    for (i, &a) in actions.iter().enumerate() {
        let (mean, log_std) = policy_forward(&params, obs.row(i).as_slice().expect("contiguous"))?;
        // Shift the old policy so some samples sit outside the clip range.
        old_logp.push(log_prob(a, mean, log_std) + rng.random_range(-0.3..0.3));
    }
    let batch = Batch {
        obs,
        actions,
        old_logp,
        advantages: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        targets: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
    };
    let hyper = PpoHyper::default();
    let (loss, stats, grad) = ppo_loss_and_grad(&batch, &params, &hyper)?;
    println!("loss {loss:.6}, clip fraction {:.2}", stats.clip_fraction);

    let h = 1e-6;
    let layers = ["W1", "b1", "W2", "b2", "W3", "b3"];
    let names: Vec<String> = layers
        .iter()
        .map(|l| format!("policy {l}"))
        .chain(["log_std".to_owned()])
        .chain(layers.iter().map(|l| format!("value {l}")))
        .collect();
    for (t, name) in names.iter().enumerate() {
        let mut worst = 0.0f64;
        for k in 0..params.tensors()[t].len() {
            let mut plus = params.clone();
            plus.tensors_mut()[t][k] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[t][k] -= h;
            let fd = (ppo_loss(&batch, &plus, &hyper)?.0 - ppo_loss(&batch, &minus, &hyper)?.0) / (2.0 * h);
            let an = grad.tensors()[t][k];
            worst = worst.max((an - fd).abs() / an.abs().max(fd.abs()).max(1e-3));
        }
        println!(
            "{:10} {:5} entries, worst relative error {worst:.2e}",
            name,
            params.tensors()[t].len()
        );
    }
    Ok(())
}
