//! Report artifacts: `report.json`, `risks.csv`, `rate.svg`, plus
//! `timing.json` for the non-deterministic wall-clock figure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::io::{fmt17, to_json_string};

use super::RateReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Writes the report files into `out_dir`, creating it if needed.
pub fn emit_report(report: &RateReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let json = out_dir.join("report.json");
    fs::write(&json, to_json_string(report)?)?;

    let csv = out_dir.join("risks.csv");
    fs::write(&csv, risks_csv(report))?;

    let svg = out_dir.join("rate.svg");
    fs::write(&svg, rate_svg(report))?;

    let timing = out_dir.join("timing.json");
    fs::write(
        &timing,
        to_json_string(&serde_json::json!({ "wall_clock_seconds": report.wall_clock_seconds }))?,
    )?;
    Ok(vec![json, csv, svg, timing])
}

pub fn risks_csv(report: &RateReport) -> String {
    let mut out = String::from("n,mode,mean,stderr,reps\n");
    for p in &report.points {
        for (mode, est) in &p.risks {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.n,
                mode.as_str(),
                fmt17(est.mean),
                fmt17(est.stderr),
                est.reps
            );
        }
    }
    out
}

/// Log-log scatter of mean risk against `n` with the fitted line per mode
/// and the theoretical slope anchored at the first point.
pub fn rate_svg(report: &RateReport) -> String {
    let mut pts = Vec::new();
    for p in &report.points {
        for est in p.risks.values() {
            if est.mean > 0.0 {
                pts.push(((p.n as f64).ln(), est.mean.ln()));
            }
        }
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad_y = ((y1 - y0) * 0.1).max(1e-3);
    let (y0, y1) = (y0 - pad_y, y1 + pad_y);
    let pad_x = ((x1 - x0) * 0.05).max(1e-3);
    let (x0, x1) = (x0 - pad_x, x1 + pad_x);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">log n</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{}" transform="rotate(-90 20 {})" text-anchor="middle">log mean risk</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let colors = ["#1f77b4", "#ff7f0e"];
    for (k, (mode, fit)) in report.fits.iter().enumerate() {
        let color = colors[k % colors.len()];
        for p in &report.points {
            if let Some(est) = p.risks.get(mode) {
                if est.mean > 0.0 {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="{color}"/>"#,
                        sx((p.n as f64).ln()),
                        sy(est.mean.ln())
                    );
                }
            }
        }
        if let Some(fit) = fit {
            let (a, b) = (x0 + pad_x, x1 - pad_x);
            let _ = writeln!(
                svg,
                r#"<line class="fit-{}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{color}" stroke-width="2"/>"#,
                mode.as_str(),
                sx(a),
                sy(fit.intercept + fit.slope * a),
                sx(b),
                sy(fit.intercept + fit.slope * b)
            );
        }
    }
    if let Some(first) = report.points.first() {
        if let Some(anchor) = first.risks.values().next().filter(|e| e.mean > 0.0) {
            let ax = (first.n as f64).ln();
            let ay = anchor.mean.ln();
            let b = x1 - pad_x;
            let _ = writeln!(
                svg,
                r#"<line class="theory" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="gray" stroke-dasharray="6 4"/>"#,
                sx(ax),
                sy(ay),
                sx(b),
                sy(ay + report.theoretical_exponent * (b - ax))
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
