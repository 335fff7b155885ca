//! Trains a policy on the oscillator surrogate and prints the drag curve.
//!
//! ```text
//! cargo run --release --example train_surrogate -- [envs] [episodes] [seed]
//! ```

use afc_drl::env::EnvConfig;
use afc_drl::orchestrator::{run_training_with, ParallelPlan, TrainingOptions};
use afc_drl::ppo::PpoHyper;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> afc_drl::Result<()> {
    let envs = arg(1, 4);
    let episodes = arg(2, 40);
    let seed = arg(3, 1);
    let config = EnvConfig::default();
    let opts = TrainingOptions {
        episodes,
        seed,
        ..TrainingOptions::default()
    };
    println!("episode  return   mean C_D  approx KL");
    let run = run_training_with(&ParallelPlan::new(envs, 1), &config, &PpoHyper::default(), &opts, |r| {
        if r.episode % 5 == 0 || r.episode + 1 == episodes {
            let kl = r.update.as_ref().map_or(f64::NAN, |u| u.mean.approx_kl);
            println!("{:7}  {:7.3}  {:8.4}  {kl:9.4}", r.episode, r.mean_reward, r.mean_cd);
        }
    })?;
    let (reports, _) = run.into_result()?;
    let tail = &reports[reports.len().saturating_sub(10)..];
    let cd = tail.iter().map(|r| r.mean_cd).sum::<f64>() / tail.len() as f64;
    println!(
        "mean C_D over the last {} episodes: {cd:.4} ({:.2}% below the uncontrolled {})",
        tail.len(),
        100.0 * (config.drag_ref - cd) / config.drag_ref,
        config.drag_ref
    );
    Ok(())
}
