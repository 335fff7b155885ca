use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{ScalingTable, TimingRecord};
use crate::coupling::shortest;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "episodes,envs,ranks,cpus,hours,speedup,efficiency,strategy";
pub const BREAKDOWN_HEADER: &str = "envs,ranks,strategy,solver_hours,io_hours,update_hours";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Svg,
    /// Per-record solver/I/O/update hours, read back by [`read_breakdown_csv`].
    Breakdown,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv | ReportFormat::Breakdown => "csv",
            ReportFormat::Markdown => "md",
            ReportFormat::Svg => "svg",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "svg" => Ok(ReportFormat::Svg),
            "breakdown" => Ok(ReportFormat::Breakdown),
            other => Err(Error::config(
                "format",
                format!("`{other}` is not one of csv, markdown, svg, breakdown"),
            )),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(shortest).unwrap_or_default()
}

pub fn render_csv(table: &ScalingTable) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for row in &table.rows {
        let r = &row.record;
        let hours = if r.is_ok() { shortest(r.hours) } else { String::new() };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.episodes,
            r.n_envs,
            r.n_ranks,
            r.cpus,
            hours,
            opt(row.speedup),
            opt(row.efficiency),
            r.strategy
        );
    }
    out
}

fn render_breakdown(table: &ScalingTable) -> String {
    let mut out = format!("{BREAKDOWN_HEADER}\n");
    for r in table.records() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n_envs,
            r.n_ranks,
            r.strategy,
            shortest(r.solver_hours),
            shortest(r.io_hours),
            shortest(r.update_hours)
        );
    }
    out
}

/// One decimal, truncated toward zero (a 1e-9 nudge absorbs binary representation error).
fn tenths(v: f64) -> String {
    let t = ((v.abs() * 10.0) + 1e-9).floor() / 10.0;
    format!("{}{t:.1}", if v < 0.0 && t > 0.0 { "-" } else { "" })
}

/// Table with the columns episodes, envs, ranks, total CPUs, hours, speedup, efficiency, one
/// bold separator row per (ranks, strategy) group.
pub fn render_markdown(table: &ScalingTable) -> String {
    let mut out = String::from(
        "| Episodes | Envs | Ranks | Total CPUs | Duration (h) | Speedup | Parallel efficiency (%) |\n\
         |---:|---:|---:|---:|---:|---:|---:|\n",
    );
    let mut group: Option<(usize, &str)> = None;
    for row in &table.rows {
        let r = &row.record;
        let key = (r.n_ranks, r.strategy.as_str());
        if group != Some(key) {
            let _ = writeln!(out, "| **ranks = {}, {}** | | | | | | |", r.n_ranks, r.strategy);
            group = Some(key);
        }
        let cell = |v: Option<f64>| v.map(tenths).unwrap_or_else(|| "n/a".into());
        let hours = if r.is_ok() { tenths(r.hours) } else { "failed".into() };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            r.episodes,
            r.n_envs,
            r.n_ranks,
            r.cpus,
            hours,
            cell(row.speedup),
            cell(row.efficiency)
        );
    }
    out
}

/// Strategy comparison: hours per strategy side by side, with the reduction relative to
/// `baseline` at the same configuration in whole percent.
pub fn render_strategy_markdown(records: &[TimingRecord]) -> String {
    let mut configs: Vec<(usize, usize, usize)> = Vec::new();
    for r in records {
        let key = (r.episodes, r.n_envs, r.n_ranks);
        if !configs.contains(&key) {
            configs.push(key);
        }
    }
    let find = |key: (usize, usize, usize), strategy: &str| {
        records
            .iter()
            .find(|r| (r.episodes, r.n_envs, r.n_ranks) == key && r.strategy == strategy && r.is_ok())
    };
    let mut out = String::from(
        "| Episodes | Envs | Ranks | Total CPUs | Baseline (h) | I/O disabled (h) | Optimized (h) |\n\
         |---:|---:|---:|---:|---:|---:|---:|\n",
    );
    for key in configs {
        let base = find(key, "baseline");
        let cell = |strategy: &str| match (find(key, strategy), base) {
            (Some(r), Some(b)) if strategy != "baseline" => {
                format!("{} ({:.0}%)", tenths(r.hours), (1.0 - r.hours / b.hours) * 100.0)
            }
            (Some(r), _) => tenths(r.hours),
            (None, _) => "n/a".into(),
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            key.0,
            key.1,
            key.2,
            key.1 * key.2,
            cell("baseline"),
            cell("disabled"),
            cell("optimized")
        );
    }
    out
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 320.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 34.0;
const BOTTOM: f64 = 46.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn log_span(values: impl Iterator<Item = f64>) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && *v > 0.0) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (1.0, 10.0);
        }
        Axis {
            lo: 10f64.powf(lo.log10().floor()),
            hi: 10f64.powf(hi.log10().ceil().max(lo.log10().floor() + 1.0)),
            log: true,
        }
    }

    fn linear(hi: f64) -> Axis {
        Axis {
            lo: 0.0,
            hi: if hi.is_finite() && hi > 0.0 { hi } else { 1.0 },
            log: false,
        }
    }

    fn frac(&self, v: f64) -> f64 {
        if self.log {
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().round() as i32, self.hi.log10().round() as i32);
            (a..=b).map(|e| 10f64.powi(e)).collect()
        } else {
            (0..=5)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / 5.0)
                .collect()
        }
    }
}

fn tick_label(v: f64) -> String {
    if v >= 10.0 || (v >= 1.0 && v.fract() == 0.0) {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

struct Panel<'a> {
    out: &'a mut String,
    x0: f64,
    x: Axis,
    y: Axis,
}

impl Panel<'_> {
    fn px(&self, v: f64) -> f64 {
        self.x0 + LEFT + self.x.frac(v) * (PANEL_W - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        TOP + (1.0 - self.y.frac(v)) * (PANEL_H - TOP - BOTTOM)
    }

    fn frame(&mut self, title: &str, xlabel: &str, ylabel: &str, x_ticks: bool) {
        let (l, r) = (self.x0 + LEFT, self.x0 + PANEL_W - RIGHT);
        let (t, b) = (TOP, PANEL_H - BOTTOM);
        let _ = writeln!(
            self.out,
            "<rect x=\"{l:.2}\" y=\"{t:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#444\"/>",
            r - l,
            b - t
        );
        let _ = writeln!(
            self.out,
            "<text x=\"{:.2}\" y=\"20\" text-anchor=\"middle\" font-weight=\"bold\">{title}</text>",
            (l + r) / 2.0
        );
        let _ = writeln!(
            self.out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{xlabel}</text>",
            (l + r) / 2.0,
            PANEL_H - 8.0
        );
        let _ = writeln!(
            self.out,
            "<text transform=\"translate({:.2},{:.2}) rotate(-90)\" text-anchor=\"middle\">{ylabel}</text>",
            self.x0 + 14.0,
            (t + b) / 2.0
        );
        if x_ticks {
            for v in self.x.ticks() {
                let x = self.px(v);
                let _ = writeln!(
                    self.out,
                    "<line x1=\"{x:.2}\" y1=\"{b:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#444\"/>\
                     <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
                    b + 4.0,
                    b + 16.0,
                    tick_label(v)
                );
            }
        }
        for v in self.y.ticks() {
            let y = self.py(v);
            let _ = writeln!(
                self.out,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{l:.2}\" y2=\"{y:.2}\" stroke=\"#444\"/>\
                 <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                l - 4.0,
                l - 6.0,
                y + 4.0,
                tick_label(v)
            );
        }
    }

    fn polyline(&mut self, points: &[(f64, f64)], color: &str, dashed: bool) {
        if points.is_empty() {
            return;
        }
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let dash = if dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        let _ = writeln!(
            self.out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
            coords.join(" ")
        );
        if !dashed {
            for &(x, y) in points {
                let _ = writeln!(
                    self.out,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                    self.px(x),
                    self.py(y)
                );
            }
        }
    }
}

/// Label plus `(cpu ratio, speedup, efficiency)` points.
type Series = (String, Vec<(f64, f64, f64)>);

/// Rows grouped by (ranks, strategy) in order of first appearance, with resources taken
/// relative to each row's reference.
fn series(table: &ScalingTable) -> Vec<Series> {
    let mut groups: Vec<Series> = Vec::new();
    for row in &table.rows {
        let (Some(s), Some(e), Some(i)) = (row.speedup, row.efficiency, row.reference) else {
            continue;
        };
        let ratio = row.record.cpus as f64 / table.rows[i].record.cpus as f64;
        let name = format!("ranks={} {}", row.record.n_ranks, row.record.strategy);
        match groups.iter_mut().find(|(n, _)| *n == name) {
            Some((_, pts)) => pts.push((ratio, s, e)),
            None => groups.push((name, vec![(ratio, s, e)])),
        }
    }
    groups
}

fn legend(out: &mut String, x: f64, y: f64, entries: &[(String, &str)]) {
    for (k, (name, color)) in entries.iter().enumerate() {
        let yy = y + 14.0 * k as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\">{name}</text>",
            yy - 9.0,
            x + 14.0,
            yy
        );
    }
}

/// Three panels: log-log speedup, semi-log efficiency, and stacked hours per record.
pub fn render_svg(table: &ScalingTable) -> String {
    let groups = series(table);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" \
         font-family=\"sans-serif\" font-size=\"11\">",
        3.0 * PANEL_W,
        PANEL_H
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let ratios = || groups.iter().flat_map(|(_, p)| p.iter().map(|q| q.0));
    let entries: Vec<(String, &str)> = groups
        .iter()
        .enumerate()
        .map(|(k, (n, _))| (n.clone(), PALETTE[k % PALETTE.len()]))
        .collect();

    {
        let x = Axis::log_span(ratios());
        let y = Axis::log_span(groups.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)).chain(ratios()));
        let mut p = Panel {
            out: &mut out,
            x0: 0.0,
            x,
            y,
        };
        p.frame("Speedup", "CPUs relative to reference", "speedup", true);
        let ideal = [
            (p.x.lo.max(p.y.lo), p.x.lo.max(p.y.lo)),
            (p.x.hi.min(p.y.hi), p.x.hi.min(p.y.hi)),
        ];
        p.polyline(&ideal, "#888", true);
        for (k, (_, pts)) in groups.iter().enumerate() {
            let line: Vec<(f64, f64)> = pts.iter().map(|q| (q.0, q.1)).collect();
            p.polyline(&line, PALETTE[k % PALETTE.len()], false);
        }
        legend(&mut out, LEFT + 8.0, TOP + 14.0, &entries);
    }
    {
        let x = Axis::log_span(ratios());
        let top = groups
            .iter()
            .flat_map(|(_, p)| p.iter().map(|q| q.2))
            .fold(100.0f64, f64::max);
        let y = Axis::linear((top / 20.0).ceil() * 20.0);
        let mut p = Panel {
            out: &mut out,
            x0: PANEL_W,
            x,
            y,
        };
        p.frame(
            "Parallel efficiency",
            "CPUs relative to reference",
            "efficiency (%)",
            true,
        );
        for (k, (_, pts)) in groups.iter().enumerate() {
            let line: Vec<(f64, f64)> = pts.iter().map(|q| (q.0, q.2)).collect();
            p.polyline(&line, PALETTE[k % PALETTE.len()], false);
        }
    }
    {
        let ok: Vec<&TimingRecord> = table.records().filter(|r| r.is_ok()).collect();
        let top = ok.iter().map(|r| r.hours).fold(0.0, f64::max);
        let y = Axis::linear(top * 1.05);
        let mut p = Panel {
            out: &mut out,
            x0: 2.0 * PANEL_W,
            x: Axis::linear(ok.len().max(1) as f64),
            y,
        };
        p.frame("Time breakdown", "configuration (envs x ranks)", "hours", false);
        let slot = (PANEL_W - LEFT - RIGHT) / ok.len().max(1) as f64;
        let colors = ["#1f77b4", "#d62728", "#2ca02c", "#bbbbbb"];
        for (k, r) in ok.iter().enumerate() {
            let mut base = 0.0;
            let x = p.px(k as f64) + slot * 0.15;
            for (part, color) in [r.solver_hours, r.io_hours, r.update_hours, r.idle_hours()]
                .into_iter()
                .zip(colors)
            {
                let (y_hi, y_lo) = (p.py(base + part), p.py(base));
                let _ = writeln!(
                    p.out,
                    "<rect x=\"{x:.2}\" y=\"{y_hi:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\"/>",
                    slot * 0.7,
                    (y_lo - y_hi).max(0.0)
                );
                base += part;
            }
            if ok.len() <= 40 {
                let _ = writeln!(
                    p.out,
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"8\" text-anchor=\"middle\">{}x{}</text>",
                    x + slot * 0.35,
                    PANEL_H - BOTTOM + 12.0,
                    r.n_envs,
                    r.n_ranks
                );
            }
        }
        let parts: Vec<(String, &str)> = ["solver", "I/O", "update", "idle"]
            .iter()
            .map(|s| s.to_string())
            .zip(colors)
            .collect();
        legend(&mut out, 2.0 * PANEL_W + PANEL_W - RIGHT - 70.0, TOP + 14.0, &parts);
    }
    out.push_str("</svg>\n");
    out
}

/// Renders `table` in `format` and writes it to `out`.
pub fn emit_report(table: &ScalingTable, format: ReportFormat, out: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => render_csv(table),
        ReportFormat::Markdown => render_markdown(table),
        ReportFormat::Svg => render_svg(table),
        ReportFormat::Breakdown => render_breakdown(table),
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(out, text).map_err(|e| Error::io(out, e))
}

fn csv_lines<'a>(text: &'a str, path: &Path, header: &str) -> Result<Vec<(u64, Vec<&'a str>)>> {
    let mut offset = 0u64;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != header {
                return Err(Error::format(path, 0, format!("expected header `{header}`")));
            }
        } else if !line.is_empty() {
            rows.push((offset, line.split(',').collect()));
        }
        offset += line.len() as u64 + 1;
    }
    if text.is_empty() {
        return Err(Error::format(path, 0, "empty file"));
    }
    Ok(rows)
}

fn field<T: FromStr>(cols: &[&str], i: usize, path: &Path, offset: u64) -> Result<T> {
    cols.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format(path, offset, format!("column {} is missing or malformed", i + 1)))
}

/// Records from a CSV written with [`ReportFormat::Csv`]; breakdown hours start at zero.
pub fn read_records_csv(path: &Path) -> Result<Vec<TimingRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    csv_lines(&text, path, CSV_HEADER)?
        .into_iter()
        .map(|(offset, cols)| {
            if cols.len() != 8 {
                return Err(Error::format(
                    path,
                    offset,
                    format!("expected 8 columns, found {}", cols.len()),
                ));
            }
            let episodes = field(&cols, 0, path, offset)?;
            let envs = field(&cols, 1, path, offset)?;
            let ranks = field(&cols, 2, path, offset)?;
            Ok(if cols[4].is_empty() {
                TimingRecord::failed(episodes, envs, ranks, cols[7], "failed".into())
            } else {
                TimingRecord::new(episodes, envs, ranks, field(&cols, 4, path, offset)?, cols[7])
            })
        })
        .collect()
}

/// Fills breakdown hours of `records` from a [`ReportFormat::Breakdown`] file.
pub fn read_breakdown_csv(path: &Path, records: &mut [TimingRecord]) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    for (offset, cols) in csv_lines(&text, path, BREAKDOWN_HEADER)? {
        if cols.len() != 6 {
            return Err(Error::format(
                path,
                offset,
                format!("expected 6 columns, found {}", cols.len()),
            ));
        }
        let envs: usize = field(&cols, 0, path, offset)?;
        let ranks: usize = field(&cols, 1, path, offset)?;
        if let Some(r) = records
            .iter_mut()
            .find(|r| r.n_envs == envs && r.n_ranks == ranks && r.strategy == cols[2])
        {
            r.solver_hours = field(&cols, 3, path, offset)?;
            r.io_hours = field(&cols, 4, path, offset)?;
            r.update_hours = field(&cols, 5, path, offset)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::{reference_table1, reference_table2, Reference};
    use super::*;

    #[test]
    fn markdown_truncates_like_the_measured_table() {
        let table = ScalingTable::new(reference_table1()[..7].to_vec(), Reference::PerGroup);
        let md = render_markdown(&table);
        assert!(md.contains("| 3000 | 12 | 5 | 60 | 32.4 | 9.4 | 78.6 |"), "{md}");
        assert!(md.contains("| 3000 | 1 | 5 | 5 | 305.8 | 1.0 | 100.0 |"));
        assert!(md.contains("| 3000 | 2 | 5 | 10 | 170.8 | 1.7 | 89.5 |"));
    }

    #[test]
    fn tenths_truncates() {
        assert_eq!(tenths(78.6523), "78.6");
        assert_eq!(tenths(7.6), "7.6");
        assert_eq!(tenths(100.0), "100.0");
        assert_eq!(tenths(-0.04), "0.0");
        assert_eq!(tenths(-1.25), "-1.2");
    }

    #[test]
    fn empty_table_gives_header_only_csv() {
        let table = ScalingTable::new(Vec::new(), Reference::PerGroup);
        assert_eq!(render_csv(&table), format!("{CSV_HEADER}\n"));
        assert!(render_svg(&table).ends_with("</svg>\n"));
    }

    #[test]
    fn svg_is_byte_stable() {
        let table = ScalingTable::new(reference_table1(), Reference::Fixed { n_envs: 1, n_ranks: 1 });
        let a = render_svg(&table);
        assert_eq!(a, render_svg(&table.clone()));
        assert!(!a.contains("NaN") && !a.contains("inf"));
        assert_eq!(a.matches("<polyline").count(), 7);
    }

    #[test]
    fn strategy_table_reports_reductions() {
        let md = render_strategy_markdown(&reference_table2());
        assert!(
            md.contains("| 3000 | 60 | 1 | 60 | 7.6 | 4.8 (37%) | 4.8 (37%) |"),
            "{md}"
        );
        assert!(md.contains("| 3000 | 1 | 1 | 1 | 225.2 | 193.1 (14%) | 200.0 (11%) |"));
    }

    #[test]
    fn csv_round_trips_records() {
        let dir = tempfile::tempdir().unwrap();
        let mut records = reference_table2();
        records[3].solver_hours = 1.25;
        records[4] = TimingRecord::failed(3000, 5, 1, "baseline", "boom".into());
        let table = ScalingTable::new(records.clone(), Reference::PerGroup);
        let csv = dir.path().join("out/records.csv");
        let parts = dir.path().join("out/breakdown.csv");
        emit_report(&table, ReportFormat::Csv, &csv).unwrap();
        emit_report(&table, ReportFormat::Breakdown, &parts).unwrap();
        let mut back = read_records_csv(&csv).unwrap();
        read_breakdown_csv(&parts, &mut back).unwrap();
        assert_eq!(back.len(), records.len());
        for (a, b) in back.iter().zip(&records) {
            assert_eq!((a.n_envs, a.n_ranks, &a.strategy), (b.n_envs, b.n_ranks, &b.strategy));
            assert_eq!(a.is_ok(), b.is_ok());
            if a.is_ok() {
                assert_eq!(a.hours.to_bits(), b.hours.to_bits());
                assert_eq!(a.solver_hours.to_bits(), b.solver_hours.to_bits());
            }
        }
    }

    #[test]
    fn bad_header_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        fs::write(&p, "envs,hours\n1,2\n").unwrap();
        assert!(matches!(read_records_csv(&p), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let table = ScalingTable::new(Vec::new(), Reference::PerGroup);
        assert!(matches!(
            emit_report(&table, ReportFormat::Csv, &blocker.join("r.csv")),
            Err(Error::Io { .. })
        ));
    }
}
