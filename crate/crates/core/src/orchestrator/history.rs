use std::fmt::Write as _;
use std::path::Path;

use super::HISTORY_HEADER;
use crate::coupling::shortest;
use crate::error::{Error, Result};

/// One line of `history.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub episode: usize,
    pub mean_reward: f64,
    pub mean_cd: f64,
    pub wall_s: f64,
    pub solver_s: f64,
    pub io_s: f64,
    pub update_s: f64,
}

pub fn read_history(path: &Path) -> Result<Vec<HistoryRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(HISTORY_HEADER) {
        return Err(Error::format(path, 0, format!("expected header `{HISTORY_HEADER}`")));
    }
    let mut offset = HISTORY_HEADER.len() as u64 + 1;
    let mut rows = Vec::new();
    for line in lines {
        let bad = |detail: &str| Error::format(path, offset, detail.to_owned());
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(bad("expected 7 columns"));
        }
        let num = |i: usize| cols[i].parse::<f64>().map_err(|_| bad("malformed number"));
        rows.push(HistoryRow {
            episode: cols[0].parse().map_err(|_| bad("malformed episode index"))?,
            mean_reward: num(1)?,
            mean_cd: num(2)?,
            wall_s: num(3)?,
            solver_s: num(4)?,
            io_s: num(5)?,
            update_s: num(6)?,
        });
        offset += line.len() as u64 + 1;
    }
    Ok(rows)
}

/// Drag over the tail of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DragSummary {
    pub episodes: usize,
    pub window: usize,
    pub mean_cd: f64,
    pub mean_reward: f64,
    /// Percent below the reference drag.
    pub reduction_pct: f64,
    pub wall_s: f64,
}

/// Averages over the last `window` rows (all rows if fewer).
pub fn summarize(rows: &[HistoryRow], drag_ref: f64, window: usize) -> Option<DragSummary> {
    if rows.is_empty() || window == 0 {
        return None;
    }
    let tail = &rows[rows.len().saturating_sub(window)..];
    let n = tail.len() as f64;
    let mean_cd = tail.iter().map(|r| r.mean_cd).sum::<f64>() / n;
    Some(DragSummary {
        episodes: rows.len(),
        window: tail.len(),
        mean_cd,
        mean_reward: tail.iter().map(|r| r.mean_reward).sum::<f64>() / n,
        reduction_pct: 100.0 * (drag_ref - mean_cd) / drag_ref,
        wall_s: rows.iter().map(|r| r.wall_s).sum(),
    })
}

impl DragSummary {
    pub fn to_text(&self) -> String {
        format!(
            "episodes = {}\nwindow = {}\nmean_cd = {}\nmean_reward = {}\ndrag_reduction_pct = {}\nwall_s = {}\n",
            self.episodes,
            self.window,
            shortest(self.mean_cd),
            shortest(self.mean_reward),
            shortest(self.reduction_pct),
            shortest(self.wall_s)
        )
    }
}

/// Two stacked line charts: episode return and mean drag against episode.
pub fn render_history_svg(rows: &[HistoryRow], drag_ref: f64) -> String {
    const W: f64 = 640.0;
    const H: f64 = 220.0;
    const L: f64 = 60.0;
    const R: f64 = 16.0;
    const T: f64 = 28.0;
    const B: f64 = 30.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W:.0}\" height=\"{:.0}\" font-family=\"sans-serif\" font-size=\"11\">",
        2.0 * H
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let last = rows.last().map_or(1.0, |r| r.episode.max(1) as f64);
    type Panel = (&'static str, fn(&HistoryRow) -> f64, Option<f64>);
    let panels: [Panel; 2] = [
        ("episode return", |r| r.mean_reward, None),
        ("mean drag coefficient", |r| r.mean_cd, Some(drag_ref)),
    ];
    for (k, (title, pick, guide)) in panels.into_iter().enumerate() {
        let y0 = k as f64 * H;
        let values = rows.iter().map(pick).chain(guide);
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() || hi - lo < 1e-12 {
            (lo, hi) = (lo.min(0.0).min(hi - 1.0), hi.max(1.0));
        }
        let px = |e: f64| L + e / last * (W - L - R);
        let py = |v: f64| y0 + T + (1.0 - (v - lo) / (hi - lo)) * (H - T - B);
        let _ = writeln!(
            out,
            "<rect x=\"{L:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#444\"/>",
            y0 + T,
            W - L - R,
            H - T - B
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-weight=\"bold\">{title}</text>",
            W / 2.0,
            y0 + 18.0
        );
        for v in [lo, (lo + hi) / 2.0, hi] {
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.3}</text>",
                L - 6.0,
                py(v) + 4.0
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">episode</text>",
            W / 2.0,
            y0 + H - 6.0
        );
        if let Some(g) = guide {
            let _ = writeln!(
                out,
                "<line x1=\"{L:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#888\" stroke-dasharray=\"6,4\"/>",
                py(g),
                W - R,
                py(g)
            );
        }
        if !rows.is_empty() {
            let pts: Vec<String> = rows
                .iter()
                .map(|r| format!("{:.2},{:.2}", px(r.episode as f64), py(pick(r))))
                .collect();
            let _ = writeln!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
                pts.join(" ")
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(episode: usize, cd: f64) -> HistoryRow {
        HistoryRow {
            episode,
            mean_reward: 3.205 - cd,
            mean_cd: cd,
            wall_s: 2.0,
            solver_s: 1.0,
            io_s: 0.5,
            update_s: 0.5,
        }
    }

    #[test]
    fn summary_uses_the_tail() {
        let rows: Vec<_> = (0..30).map(|e| row(e, if e < 20 { 3.2 } else { 2.9 })).collect();
        let s = summarize(&rows, 3.205, 10).unwrap();
        assert_eq!(s.window, 10);
        assert!((s.mean_cd - 2.9).abs() < 1e-12);
        assert!((s.reduction_pct - 100.0 * 0.305 / 3.205).abs() < 1e-9);
        assert_eq!(s.wall_s, 60.0);
        assert_eq!(summarize(&rows[..3], 3.205, 10).unwrap().window, 3);
        assert!(summarize(&[], 3.205, 10).is_none());
    }

    #[test]
    fn history_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("history.csv");
        std::fs::write(
            &p,
            format!("{HISTORY_HEADER}\n0,1.5,3.1,2.0,1.0,0.5,0.5\n1,2.5,3.0,2.0,1.0,0.5,0.5\n"),
        )
        .unwrap();
        let rows = read_history(&p).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].mean_reward, 2.5);
        std::fs::write(&p, format!("{HISTORY_HEADER}\n0,1.5,x,2.0,1.0,0.5,0.5\n")).unwrap();
        assert!(matches!(read_history(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn chart_is_stable() {
        let rows: Vec<_> = (0..5).map(|e| row(e, 3.0)).collect();
        let a = render_history_svg(&rows, 3.205);
        assert_eq!(a, render_history_svg(&rows, 3.205));
        assert!(!a.contains("NaN"));
        assert!(render_history_svg(&[], 3.205).ends_with("</svg>\n"));
    }
}
