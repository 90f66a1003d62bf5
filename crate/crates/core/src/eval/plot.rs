//! Efficiency curve: metric means against the fraction of removed reviews.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eval::benchmark::EvaluationReport;
use crate::eval::perturb::PerturbationKind;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// `(fraction removed, mean)` points per method for one metric.
pub fn efficiency_series(report: &EvaluationReport, metric: &str) -> BTreeMap<String, Vec<(f64, f64)>> {
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for s in &report.scenarios {
        let alpha = match &s.perturbation {
            None => 0.0,
            Some(p) if p.kind == PerturbationKind::ReviewSubsample => p.alpha,
            Some(_) => continue,
        };
        for m in &s.methods {
            if let Some(v) = m.mean(metric) {
                series.entry(m.method.clone()).or_default().push((alpha, v));
            }
        }
    }
    for points in series.values_mut() {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    series
}

/// SVG line chart: `left` metric as solid lines on the left axis, `right`
/// metric as dashed lines on the right axis.
pub fn efficiency_svg(report: &EvaluationReport, left: &str, right: &str) -> Result<String> {
    let left_series = efficiency_series(report, left);
    let right_series = efficiency_series(report, right);
    if left_series.is_empty() && right_series.is_empty() {
        return Err(Error::Validation(format!(
            "report has no values for `{left}` or `{right}` on original or sub-sampled data"
        )));
    }
    let max_alpha = left_series
        .values()
        .chain(right_series.values())
        .flatten()
        .map(|p| p.0)
        .fold(0.0, f64::max)
        .max(1e-9);
    let range = |series: &BTreeMap<String, Vec<(f64, f64)>>| {
        let (lo, hi) = series
            .values()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
        if lo.is_finite() {
            let pad = ((hi - lo) * 0.1).max(0.01);
            (lo - pad, hi + pad)
        } else {
            (0.0, 1.0)
        }
    };
    let (l_lo, l_hi) = range(&left_series);
    let (r_lo, r_hi) = range(&right_series);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x = |a: f64| MARGIN + a / max_alpha * plot_w;
    let y = |v: f64, lo: f64, hi: f64| HEIGHT - MARGIN - (v - lo) / (hi - lo) * plot_h;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        w,
        r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xa = x(t * max_alpha);
        let _ = writeln!(w, r#"<text x="{xa:.1}" y="{:.1}" text-anchor="middle">{:.2}</text>"#, y1 + 16.0, t * max_alpha);
        let yl = y1 - t * plot_h;
        let _ = writeln!(w, r#"<text x="{:.1}" y="{yl:.1}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, l_lo + t * (l_hi - l_lo));
        let _ = writeln!(w, r#"<text x="{:.1}" y="{yl:.1}">{:.3}</text>"#, x1 + 4.0, r_lo + t * (r_hi - r_lo));
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">fraction of removed reviews</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(w, r#"<text x="{x0}" y="{:.1}">{left} (solid)</text>"#, y0 - 20.0);
    let _ = writeln!(w, r#"<text x="{x1}" y="{:.1}" text-anchor="end">{right} (dashed)</text>"#, y0 - 20.0);

    let methods: Vec<&String> = {
        let mut m: Vec<&String> = left_series.keys().chain(right_series.keys()).collect();
        m.sort();
        m.dedup();
        m
    };
    for (i, method) in methods.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for (series, lo, hi, dash) in [(&left_series, l_lo, l_hi, ""), (&right_series, r_lo, r_hi, r#" stroke-dasharray="6,4""#)] {
            let Some(points) = series.get(*method) else { continue };
            let d: Vec<String> = points.iter().map(|&(a, v)| format!("{:.1},{:.1}", x(a), y(v, lo, hi))).collect();
            let _ = writeln!(
                w,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
                d.join(" ")
            );
        }
        let ly = y0 + 16.0 * (i as f64 + 1.0);
        let _ = writeln!(w, r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{method}</text>"#, x0 + 8.0);
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}
