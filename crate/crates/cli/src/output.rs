//! Report persistence: summary.json, one CSV per table and SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

use eqlab_core::report::Table;

use crate::config::ExperimentConfig;
use crate::experiments::{Outcome, PlotSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn summary_json(cfg: &ExperimentConfig, outcome: &Outcome, wall_seconds: f64) -> Value {
    let r = &outcome.report;
    json!({
        "tool": "eqlab",
        "version": VERSION,
        "config": {
            "subcommand": cfg.subcommand.name(),
            "seed": cfg.seed,
            "workers": cfg.workers,
            "params": cfg.params,
        },
        "wall_seconds": wall_seconds,
        "tables": r.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>(),
        "values": r.values,
        "checks": r.checks_json(),
        "all_passed": r.all_passed(),
    })
}

/// Write every artifact into `out_dir`; returns the paths in write order.
pub fn write_report(
    cfg: &ExperimentConfig,
    outcome: &Outcome,
    wall_seconds: f64,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut paths = Vec::new();
    let mut write = |name: String, bytes: &[u8]| -> Result<()> {
        let path = out_dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        paths.push(path);
        Ok(())
    };
    let summary = serde_json::to_string_pretty(&summary_json(cfg, outcome, wall_seconds))?;
    write("summary.json".into(), summary.as_bytes())?;
    for t in &outcome.report.tables {
        write(format!("{}.csv", t.name), t.to_csv().as_bytes())?;
    }
    if cfg.plots {
        for spec in &outcome.plots {
            if let Some(svg) = render(spec, &outcome.report.tables) {
                write(format!("{}.svg", spec.file_stem()), svg.as_bytes())?;
            }
        }
    }
    Ok(paths)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn column(t: &Table, name: &str) -> Option<usize> {
    t.header.iter().position(|h| h == name)
}

fn render(spec: &PlotSpec, tables: &[Table]) -> Option<String> {
    match spec {
        PlotSpec::Scatter { table, x, y } => {
            let t = tables.iter().find(|t| &t.name == table)?;
            let (ix, iy) = (column(t, x)?, column(t, y)?);
            let pts: Vec<(f64, f64)> =
                t.rows.iter().filter_map(|r| Some((r[ix].parse().ok()?, r[iy].parse().ok()?))).collect();
            Some(svg(table, x, y, &[(String::new(), pts)], false))
        }
        PlotSpec::LogLine { table, x, y, series } => {
            let t = tables.iter().find(|t| &t.name == table)?;
            let (ix, iy) = (column(t, x)?, column(t, y)?);
            let is = series.as_ref().and_then(|s| column(t, s));
            let mut groups: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
            for r in &t.rows {
                let key = is.map(|i| r[i].clone()).unwrap_or_default();
                let (Ok(a), Ok(b)) = (r[ix].parse::<f64>(), r[iy].parse::<f64>()) else { continue };
                if b == 0.0 || !b.is_finite() {
                    continue;
                }
                let p = (a, b.abs().log10());
                match groups.iter_mut().find(|g| g.0 == key) {
                    Some(g) => g.1.push(p),
                    None => groups.push((key, vec![p])),
                }
            }
            Some(svg(table, x, &format!("log10 |{y}|"), &groups, true))
        }
    }
}

fn svg(title: &str, xlabel: &str, ylabel: &str, groups: &[(String, Vec<(f64, f64)>)], lines: bool) -> String {
    let all = groups.iter().flat_map(|g| g.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-12 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="{anchor}">{}</text>"#, sx(v), HEIGHT - MARGIN + 16.0, tick(v));
    }
    for v in [y0, y1] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN - 4.0, sy(v) + 4.0, tick(v));
    }
    for (i, (name, pts)) in groups.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if lines && pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" points="{}"/>"#, path.join(" "));
        }
        let r = if lines { 3.0 } else { 1.0 };
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{color}"/>"#, sx(x), sy(y));
        }
        if !name.is_empty() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
                WIDTH - MARGIN + 4.0,
                MARGIN + 14.0 * (i as f64 + 1.0),
                escape(name)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
