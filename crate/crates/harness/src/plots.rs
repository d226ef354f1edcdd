//! Plot-ready tables and minimal static SVG charts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Result;
use gpsmbo_core::math;

use crate::experiment::{write_weight_means, StudyResult, WeightMean, WEIGHTS_CSV};
use crate::io::{csv_writer, fmt_g9, write_string};

pub const BOXPLOT_CSV: &str = "boxplot.csv";

/// Long format: one row per (problem, strategy, checkpoint, run).
pub fn write_boxplot_csv(path: &Path, study: &StudyResult) -> Result<usize> {
    let mut w = csv_writer(path)?;
    w.write_record(["problem", "strategy", "checkpoint", "run", "best"])?;
    let mut rows = 0;
    for r in &study.runs {
        let Ok(rec) = &r.outcome else { continue };
        for &cp in &study.checkpoints {
            if let Some(v) = rec.best_at(cp) {
                w.write_record([r.problem.clone(), r.strategy.clone(), cp.to_string(), r.repetition.to_string(), fmt_g9(v)])?;
                rows += 1;
            }
        }
    }
    w.flush()?;
    Ok(rows)
}

/// Writes the boxplot and weight tables plus one SVG per problem for each
/// chart type; returns the SVG paths.
pub fn emit_plots(dir: &Path, study: &StudyResult) -> Result<Vec<PathBuf>> {
    write_boxplot_csv(&dir.join(BOXPLOT_CSV), study)?;
    write_weight_means(&dir.join(WEIGHTS_CSV), &study.weight_means)?;
    let mut files = Vec::new();
    for problem in study.problems() {
        let path = dir.join("plots").join(format!("boxplot_{}.svg", file_stem(&problem)));
        write_string(&path, &boxplot_svg(study, &problem))?;
        files.push(path);
        for strategy in study.strategies() {
            let series: Vec<&WeightMean> =
                study.weight_means.iter().filter(|m| m.problem == problem && m.strategy == strategy).collect();
            if series.is_empty() {
                continue;
            }
            let path = dir.join("plots").join(format!("weights_{}_{}.svg", file_stem(&problem), file_stem(&strategy)));
            write_string(&path, &weights_svg(&problem, &strategy, &series))?;
            files.push(path);
        }
    }
    Ok(files)
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const W: f64 = 640.0;
const H: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    s
}

/// Y axis over `[lo, hi]` with five ticks; returns the value-to-pixel map.
fn y_axis(s: &mut String, lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let (lo, hi) = if hi - lo > 0.0 { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let plot_h = H - TOP - BOTTOM;
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#, H - BOTTOM);
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = H - BOTTOM - plot_h * k as f64 / 4.0;
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, fmt_g(v));
    }
    move |v| H - BOTTOM - plot_h * (v - lo) / (hi - lo)
}

fn fmt_g(v: f64) -> String {
    crate::io::fmt_g(v, 3)
}

fn boxplot_svg(study: &StudyResult, problem: &str) -> String {
    let strategies = study.strategies();
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for &cp in &study.checkpoints {
        for s in &strategies {
            groups.push((format!("{s} @{cp}"), study.values_at(problem, s, cp)));
        }
    }
    let all: Vec<f64> = groups.iter().flat_map(|g| g.1.iter().copied()).filter(|v| v.is_finite()).collect();
    let lo = all.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(lo);
    let mut s = header(&format!("{problem}: best value at checkpoints"));
    let y = y_axis(&mut s, lo, hi);
    let slot = (W - LEFT - RIGHT) / groups.len().max(1) as f64;
    for (i, (label, v)) in groups.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="9">{}</text>"#,
            H - BOTTOM + 16.0 + 12.0 * (i % 2) as f64,
            escape(label)
        );
        if v.is_empty() {
            continue;
        }
        let (q1, med, q3) = (math::quantile(v, 0.25), math::median(v), math::quantile(v, 0.75));
        let (mn, mx) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        let half = slot * 0.3;
        let _ = writeln!(s, r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#, y(mn), y(mx));
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#cfe2f3" stroke="black"/>"##,
            cx - half,
            y(q3),
            2.0 * half,
            (y(q1) - y(q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            y(med),
            cx + half,
            y(med)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn weights_svg(problem: &str, strategy: &str, series: &[&WeightMean]) -> String {
    let mut s = header(&format!("{problem} ({strategy}): mean normalized weights"));
    let y = y_axis(&mut s, 0.0, 1.0);
    let n = series.iter().map(|m| m.iteration).max().unwrap_or(1).max(2);
    let x = |it: usize| LEFT + (W - LEFT - RIGHT) * (it - 1) as f64 / (n - 1) as f64;
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#, H - BOTTOM, W - RIGHT, H - BOTTOM);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#, W / 2.0, H - 20.0);
    let lines: [(&str, &str, fn(&WeightMean) -> f64); 3] =
        [("PhD", "", |m| m.phd), ("TED", "6,3", |m| m.ted), ("SHD2", "2,3", |m| m.shd2)];
    for (k, (name, dash, get)) in lines.iter().enumerate() {
        let pts: Vec<String> = series.iter().map(|m| format!("{:.2},{:.2}", x(m.iteration), y(get(m)))).collect();
        let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="black"{dash_attr}/>"#, pts.join(" "));
        let ly = TOP + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="black"{dash_attr}/><text x="{}" y="{}">{name}</text>"#,
            W - 110.0,
            W - 80.0,
            W - 75.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{run_experiment, tests::tiny_config, RunOptions};

    #[test]
    fn tables_and_svgs() {
        let study = run_experiment(&tiny_config(), &RunOptions { workers: Some(1), progress: false }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plots(dir.path(), &study).unwrap();
        let (_, rows) = crate::io::read_table(&dir.path().join(BOXPLOT_CSV)).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 2);
        assert_eq!(files.len(), 2);
        for f in files {
            let text = std::fs::read_to_string(f).unwrap();
            roxmltree::Document::parse(&text).unwrap();
        }
    }
}
