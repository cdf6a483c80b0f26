//! Report files: JSON, trace CSV, and hand-written SVG plots.
//!
//! All writers are deterministic: floats use the shortest round-trip
//! representation and nothing depends on time or thread scheduling.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::IterateTrace;
use crate::error::Result;

pub const TRACE_HEADER: &str = "n,iterate_norm,iterate_err,cesaro_norm,cesaro_err,reference_bound";

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    write_file(dir, name, &to_json(value)?)
}

/// One row per entry; absent columns are left empty.
pub fn trace_csv(trace: &IterateTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for (k, e) in trace.entries.iter().enumerate() {
        let pair = |est: &Option<crate::quadrature::NormEstimate>| match est {
            Some(x) => (x.value.to_string(), x.error_estimate.to_string()),
            None => (String::new(), String::new()),
        };
        let (it, it_err) = pair(&e.iterate_norm);
        let (ce, ce_err) = pair(&e.cesaro_norm);
        let bound = trace.reference_bound.as_ref().and_then(|b| b.get(k)).map_or(String::new(), |b| b.to_string());
        let _ = writeln!(out, "{},{it},{it_err},{ce},{ce_err},{bound}", e.n);
    }
    out
}

pub fn write_trace_csv(dir: &Path, trace: &IterateTrace) -> Result<PathBuf> {
    write_file(dir, "trace.csv", &trace_csv(trace))
}

pub fn cloud_csv(points: &[Complex64]) -> String {
    let mut out = String::from("re,im\n");
    for z in points {
        let _ = writeln!(out, "{},{}", z.re, z.im);
    }
    out
}

pub fn write_cloud_csv(dir: &Path, points: &[Complex64]) -> Result<PathBuf> {
    write_file(dir, "spectrum.csv", &cloud_csv(points))
}

/// Affine map from a data box onto the plot area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0).max(f64::MIN_POSITIVE) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0).max(f64::MIN_POSITIVE) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    Some(if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) })
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn axes(s: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (x0, y0) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {MARGIN} L{x0} {y0} L{} {y0}" fill="none" stroke="black"/>"#,
        WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (value, anchor, x, y) in [
        (frame.x.0, "start", x0, y0 + 16.0),
        (frame.x.1, "end", WIDTH - MARGIN, y0 + 16.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{value:.3}</text>"#);
    }
    for (value, y) in [(frame.y.0, y0), (frame.y.1, MARGIN)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="10" text-anchor="end">{value:.3}</text>"#,
            x0 - 4.0
        );
    }
}

fn polyline(s: &mut String, frame: &Frame, points: &[(f64, f64)], stroke: &str, dash: bool) {
    if points.is_empty() {
        return;
    }
    let coords: Vec<String> = points.iter().map(|&(x, y)| format!("{:.3},{:.3}", frame.px(x), frame.py(y))).collect();
    let dash = if dash { r#" stroke-dasharray="6 4""# } else { "" };
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{stroke}"{dash}/>"#, coords.join(" "));
}

/// Log-log plot of `n` against the Cesàro norm, with the reference bound
/// dashed when present. Nonpositive values are skipped.
pub fn trace_svg(trace: &IterateTrace) -> String {
    let log_point = |n: u32, v: f64| (v > 0.0 && v.is_finite()).then(|| ((n as f64).log10(), v.log10()));
    let cesaro: Vec<(f64, f64)> = trace
        .entries
        .iter()
        .filter_map(|e| e.cesaro_norm.as_ref().and_then(|c| log_point(e.n, c.value)))
        .collect();
    let reference: Vec<(f64, f64)> = match &trace.reference_bound {
        Some(b) => trace.entries.iter().zip(b).filter_map(|(e, &v)| log_point(e.n, v)).collect(),
        None => Vec::new(),
    };
    let mut s = svg_open(&format!("cesaro means of {} on {}", trace.psi_id, trace.space));
    let all = || cesaro.iter().chain(reference.iter());
    if let (Some(x), Some(y)) = (bounds(all().map(|p| p.0)), bounds(all().map(|p| p.1))) {
        let frame = Frame { x, y };
        axes(&mut s, &frame, "log10 n", "log10 norm");
        polyline(&mut s, &frame, &cesaro, "steelblue", false);
        polyline(&mut s, &frame, &reference, "firebrick", true);
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_trace_svg(dir: &Path, trace: &IterateTrace) -> Result<PathBuf> {
    write_file(dir, "trace.svg", &trace_svg(trace))
}

/// Scatter plot of a range cloud with the unit circle and the point 1 marked.
pub fn cloud_svg(points: &[Complex64], title: &str) -> String {
    let mut s = svg_open(title);
    let reach = points.iter().map(|z| z.re.abs().max(z.im.abs())).fold(1.0f64, f64::max) * 1.05;
    let frame = Frame { x: (-reach, reach), y: (-reach, reach) };
    axes(&mut s, &frame, "Re", "Im");
    let circle: Vec<(f64, f64)> = (0..=128)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 128.0;
            (t.cos(), t.sin())
        })
        .collect();
    polyline(&mut s, &frame, &circle, "gray", true);
    for z in points {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="1.5" fill="steelblue"/>"#, frame.px(z.re), frame.py(z.im));
    }
    let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="none" stroke="firebrick"/>"#, frame.px(1.0), frame.py(0.0));
    s.push_str("</svg>\n");
    s
}

pub fn write_cloud_svg(dir: &Path, points: &[Complex64], title: &str) -> Result<PathBuf> {
    write_file(dir, "spectrum.svg", &cloud_svg(points, title))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{cesaro_trace, TraceEntry};
    use crate::function::AnalyticFunction;
    use crate::norms::SpaceTag;
    use crate::quadrature::GridSpec;

    #[test]
    fn empty_trace_is_header_only() {
        let t = IterateTrace {
            space: SpaceTag::Bloch,
            psi_id: "poly 0 1".into(),
            f_id: "const 1".into(),
            entries: Vec::<TraceEntry>::new(),
            reference_bound: None,
        };
        assert_eq!(trace_csv(&t), format!("{TRACE_HEADER}\n"));
        assert!(trace_svg(&t).ends_with("</svg>\n"));
    }

    #[test]
    fn rotation_trace_rows() {
        let i = AnalyticFunction::Constant(Complex64::new(0.0, 1.0));
        let one = AnalyticFunction::Constant(Complex64::new(1.0, 0.0));
        let t = cesaro_trace(&i, &one, SpaceTag::Bloch, 8, &GridSpec::default(), 256).unwrap();
        let csv = trace_csv(&t);
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), 8);
        let fields: Vec<&str> = rows[3].split(',').collect();
        assert_eq!(fields[0], "4");
        assert!(fields[3].parse::<f64>().unwrap().abs() < 1e-12);
        assert_eq!(fields[1], "");
        assert!(trace_svg(&t).contains("stroke-dasharray"));
    }
}
