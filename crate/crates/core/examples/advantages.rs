//! Discounted returns and generalized advantages for a short reward sequence.
//!
//! ```text
//! cargo run --example advantages
//! ```

use afc_drl::ppo::{compute_gae, compute_returns, normalize_advantages};

fn main() -> afc_drl::Result<()> {
    let rewards = [0.1, 0.3, -0.2, 0.5, 0.4, 0.0];
    let values = [0.5, 0.6, 0.2, 0.7, 0.3, 0.1];
    // The episode is cut by the time limit, so the tail is bootstrapped from the next state's value.
    let bootstrap = 0.2;
    let returns = compute_returns(&rewards, 0.99)?;
    for lambda in [0.0, 0.95, 1.0] {
        let gae = compute_gae(&rewards, &values, bootstrap, 0.99, lambda)?;
        let mut normalized = gae.advantages.clone();
        normalize_advantages(&mut normalized);
        println!("lambda {lambda}:");
        println!("  advantages {:?}", rounded(&gae.advantages));
        println!("  targets    {:?}", rounded(&gae.targets));
        println!("  normalized {:?}", rounded(&normalized));
    }
    println!("returns without bootstrap {:?}", rounded(&returns));
    Ok(())
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}
