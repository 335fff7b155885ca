//! Prints the virtual cost model: solver scaling with ranks and disk contention with environments.
//!
//! ```text
//! cargo run --example cost_model
//! ```

use afc_drl::coupling::IoStrategy;
use afc_drl::orchestrator::{virtual_episode_time, ParallelPlan};

fn main() -> afc_drl::Result<()> {
    println!("ranks  solver s/actuation  solver efficiency");
    for ranks in [1, 2, 4, 5, 8, 16, 32] {
        let plan = ParallelPlan::new(1, ranks);
        println!(
            "{ranks:5}  {:18.3}  {:16.1}%",
            plan.solver_time(),
            100.0 * plan.solver_efficiency()
        );
    }

    println!("\nenvs  episode wall s: baseline / optimized / disabled");
    for envs in [1, 10, 20, 40, 60] {
        let plan = ParallelPlan::new(envs, 1);
        let mut walls = Vec::new();
        for strategy in [IoStrategy::baseline(), IoStrategy::optimized(), IoStrategy::disabled()] {
            walls.push(virtual_episode_time(&plan, strategy.bytes_moved_per_actuation(), 100)?.wall_s);
        }
        println!("{envs:4}  {:8.1} / {:8.1} / {:8.1}", walls[0], walls[1], walls[2]);
    }
    Ok(())
}
