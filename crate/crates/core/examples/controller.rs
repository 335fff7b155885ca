//! Drives the surrogate with hand-written controllers and compares drag.
//!
//! ```text
//! cargo run --release --example controller
//! ```

use afc_drl::env::{EnvConfig, SurrogateEnv};

fn episode(config: &EnvConfig, policy: impl Fn(&[f64], f64) -> f64) -> afc_drl::Result<(f64, f64)> {
    let mut env = SurrogateEnv::new(config.clone(), 7)?;
    let mut obs = env.reset(11);
    let (mut ret, mut cd_sum, mut n) = (0.0, 0.0, 0);
    for _ in 0..config.actuations_per_episode {
        let out = env.actuate(policy(&obs, env.state().x))?;
        ret += out.reward;
        cd_sum += out.records.iter().map(|r| r.cd).sum::<f64>();
        n += out.records.len();
        obs = out.observation;
    }
    Ok((ret, cd_sum / n as f64))
}

fn main() -> afc_drl::Result<()> {
    let config = EnvConfig::default();
    println!(
        "limit-cycle radius {:.3}, shedding period {:.3}, actuation period {:.3}, {} probes",
        config.limit_cycle_radius(),
        config.shedding_period(),
        config.actuation_period(),
        config.obs_dim
    );
    type Controller = Box<dyn Fn(&[f64], f64) -> f64>;
    let controllers: [(&str, Controller); 4] = [
        ("no actuation", Box::new(|_, _| 0.0)),
        ("constant 0.5", Box::new(|_, _| 0.5)),
        ("proportional -2x", Box::new(|_, x| -2.0 * x)),
        ("probe 0 feedback", Box::new(|obs, _| -2.0 * obs[0])),
    ];
    println!("{:18} {:>9} {:>9}", "controller", "return", "mean C_D");
    for (name, policy) in controllers {
        let (ret, cd) = episode(&config, policy)?;
        println!("{name:18} {ret:9.3} {cd:9.4}");
    }
    Ok(())
}
