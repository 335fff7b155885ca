//! Runs the virtual-clock scaling sweeps and prints them next to the measured reference tables.
//!
//! ```text
//! cargo run --example scaling_sweep
//! ```

use afc_drl::bench::{
    grid, reference_table1, reference_table2, render_markdown, render_strategy_markdown, run_sweep, Reference,
    ScalingTable, SweepSpec,
};
use afc_drl::coupling::IoStrategy;
use afc_drl::orchestrator::ParallelPlan;

fn main() -> afc_drl::Result<()> {
    let spec = SweepSpec::virtual_default();
    let template = ParallelPlan::new(1, 1);

    let table1 = run_sweep(&grid("table1", &template, &IoStrategy::baseline())?, &spec);
    println!("## Virtual sweep, environments x ranks\n");
    print!("{}", render_markdown(&ScalingTable::new(table1, Reference::PerGroup)));
    println!("\n## Measured reference\n");
    print!(
        "{}",
        render_markdown(&ScalingTable::new(reference_table1(), Reference::PerGroup))
    );

    let table2 = run_sweep(&grid("table2", &template, &IoStrategy::baseline())?, &spec);
    println!("\n## Virtual sweep, exchange strategies\n");
    print!("{}", render_strategy_markdown(&table2));
    println!("\n## Measured reference\n");
    print!("{}", render_strategy_markdown(&reference_table2()));
    Ok(())
}
