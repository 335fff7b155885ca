//! Couples training to an external solver process through files.
//!
//! The example launches itself as the solver: invoked with `solve`, it plays the mock solver
//! inside the directory it was started in.
//!
//! ```text
//! cargo run --release --example external_solver
//! ```

use std::time::Duration;

use afc_drl::coupling::{
    run_mock_solver, IoMode, IoStrategy, Launcher, MockSolverOptions, SolverTemplate, MOCK_TEMPLATE,
};
use afc_drl::env::EnvConfig;
use afc_drl::orchestrator::{run_training, ParallelPlan, SolverBackend, TrainingOptions};
use afc_drl::ppo::PpoHyper;

fn main() -> afc_drl::Result<()> {
    if std::env::args().nth(1).as_deref() == Some("solve") {
        let opts = MockSolverOptions {
            seed: 0,
            sleep: Duration::ZERO,
            io: IoMode::Optimized,
            fail: false,
        };
        return run_mock_solver(&std::env::current_dir().expect("working directory"), &opts);
    }

    let me = std::env::current_exe().expect("own path");
    let run_dir = std::env::temp_dir().join("afc_external_solver");
    let backend = SolverBackend::External {
        launcher: Launcher::new(me.to_string_lossy(), ["solve"]),
        template: SolverTemplate {
            text: MOCK_TEMPLATE.into(),
            target: "solver.cfg".into(),
        },
        timeout: Duration::from_secs(30),
    };
    let opts = TrainingOptions {
        episodes: 2,
        seed: 5,
        strategy: IoStrategy::optimized(),
        backend,
        run_dir: Some(run_dir.clone()),
        hidden: 64,
        ..TrainingOptions::default()
    };
    let config = EnvConfig::default();
    let (reports, _) = run_training(&ParallelPlan::new(2, 1), &config, &PpoHyper::default(), &opts)?.into_result()?;
    for r in &reports {
        let bytes: u64 = r.env_timings.iter().map(|t| t.bytes_moved).sum();
        println!(
            "episode {}: return {:.3}, mean C_D {:.4}, {} solver launches, {bytes} bytes exchanged",
            r.episode,
            r.mean_reward,
            r.mean_cd,
            r.env_timings.len() * config.actuations_per_episode
        );
    }
    println!("history in {}", run_dir.join("history.csv").display());
    Ok(())
}
