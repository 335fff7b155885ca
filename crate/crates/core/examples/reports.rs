//! Renders a sweep as CSV, Markdown and SVG files and reads the CSV back.
//!
//! ```text
//! cargo run --example reports -- [directory]
//! ```

use std::path::PathBuf;

use afc_drl::bench::{
    emit_report, grid, read_records_csv, run_sweep, Reference, ReportFormat, ScalingTable, SweepSpec,
};
use afc_drl::coupling::IoStrategy;
use afc_drl::orchestrator::ParallelPlan;

fn main() -> afc_drl::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("afc_reports"));
    std::fs::create_dir_all(&out).map_err(|e| afc_drl::Error::io(&out, e))?;
    let records = run_sweep(
        &grid("table1", &ParallelPlan::new(1, 1), &IoStrategy::baseline())?,
        &SweepSpec::virtual_default(),
    );
    let table = ScalingTable::new(records.clone(), Reference::Fixed { n_envs: 1, n_ranks: 1 });
    for format in [
        ReportFormat::Csv,
        ReportFormat::Markdown,
        ReportFormat::Svg,
        ReportFormat::Breakdown,
    ] {
        let name = match format {
            ReportFormat::Breakdown => "breakdown.csv".to_owned(),
            _ => format!("table1.{}", format.extension()),
        };
        let path = out.join(name);
        emit_report(&table, format, &path)?;
        println!("wrote {}", path.display());
    }
    let back = read_records_csv(&out.join("table1.csv"))?;
    assert_eq!(back.len(), records.len());
    let best = table
        .rows
        .iter()
        .filter_map(|r| Some((r.speedup?, &r.record)))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty sweep");
    println!(
        "largest speedup against 1 env x 1 rank: {:.1} at {} envs x {} ranks ({:.1} h)",
        best.0, best.1.n_envs, best.1.n_ranks, best.1.hours
    );
    Ok(())
}
