//! CSV/JSON serialization of run results and a minimal SVG line chart.
//!
//! Numbers are written with 17 significant digits in both formats so the two
//! mirrors carry identical values, and nothing time-dependent goes into the
//! files: identical spec and seed reproduce them byte for byte.

use crate::harness::{ExperimentSpec, RunResult};
use std::fmt::Write;

/// 17-significant-digit scientific form, the round-trip-safe width for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub const CSV_HEADER: &str = "experiment,n,L,p,q,n0,estimate,stderr,reps,truncated,seed";

pub fn csv_string(result: &RunResult, spec: &ExperimentSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# catalan-perc");
    let _ = writeln!(out, "# config: {}", spec.config_line());
    let _ = writeln!(out, "# digest: {:016x}", result.spec_digest);
    let _ = writeln!(out, "# complete: {}", result.complete);
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.experiment,
            opt_u64(r.n),
            opt_u64(r.l),
            opt_f64(r.p),
            opt_f64(r.q),
            opt_u64(r.n0),
            fmt_f64(r.estimate),
            opt_f64(r.stderr),
            r.reps,
            r.truncated,
            r.seed
        );
    }
    out
}

fn json_opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "null".into())
}

fn json_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "null".into())
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// JSON mirror of the CSV with identical numeric tokens.
pub fn json_string(result: &RunResult, spec: &ExperimentSpec) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"config\": \"{}\",", json_escape(&spec.config_line()));
    let _ = writeln!(out, "  \"digest\": \"{:016x}\",", result.spec_digest);
    let _ = writeln!(out, "  \"complete\": {},", result.complete);
    out.push_str("  \"rows\": [\n");
    for (i, r) in result.rows.iter().enumerate() {
        let _ = write!(
            out,
            "    {{\"experiment\": \"{}\", \"n\": {}, \"L\": {}, \"p\": {}, \"q\": {}, \"n0\": {}, \"estimate\": {}, \"stderr\": {}, \"reps\": {}, \"truncated\": {}, \"seed\": {}}}",
            json_escape(&r.experiment),
            json_opt_u64(r.n),
            json_opt_u64(r.l),
            json_opt_f64(r.p),
            json_opt_f64(r.q),
            json_opt_u64(r.n0),
            fmt_f64(r.estimate),
            json_opt_f64(r.stderr),
            r.reps,
            r.truncated,
            r.seed
        );
        out.push_str(if i + 1 == result.rows.len() { "\n" } else { ",\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

/// Single-polyline chart with a one-standard-deviation envelope. `points`
/// are (x, estimate, stderr) triples in sweep order.
pub fn svg_chart(points: &[(f64, f64, f64)], x_label: &str, y_label: &str) -> String {
    let (w, h, m) = (640.0, 400.0, 50.0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    if points.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let lo: Vec<f64> = points.iter().map(|p| p.1 - p.2).collect();
    let hi: Vec<f64> = points.iter().map(|p| p.1 + p.2).collect();
    let (x_min, x_max) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_min, y_max) = (
        lo.iter().cloned().fold(f64::INFINITY, f64::min),
        hi.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let x_span = (x_max - x_min).max(1e-12);
    let y_span = (y_max - y_min).max(1e-12);
    let px = |x: f64| m + (x - x_min) / x_span * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y_min) / y_span * (h - 2.0 * m);

    // envelope polygon: upper path forward, lower path backward
    let mut poly = String::new();
    for (&x, &y) in xs.iter().zip(&hi) {
        let _ = write!(poly, "{:.2},{:.2} ", px(x), py(y));
    }
    for (&x, &y) in xs.iter().zip(&lo).rev() {
        let _ = write!(poly, "{:.2},{:.2} ", px(x), py(y));
    }
    let _ = writeln!(
        out,
        "  <polygon points=\"{}\" fill=\"#a6c8ff\" fill-opacity=\"0.5\" stroke=\"none\"/>",
        poly.trim_end()
    );
    let mut line = String::new();
    for &(x, y, _) in points {
        let _ = write!(line, "{:.2},{:.2} ", px(x), py(y));
    }
    let _ = writeln!(
        out,
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\"/>",
        line.trim_end()
    );
    // axes
    let _ = writeln!(
        out,
        "  <line x1=\"{m}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        h - m,
        w - m,
        h - m
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{}\" stroke=\"black\"/>",
        h - m
    );
    let _ = writeln!(
        out,
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>",
        w / 2.0,
        h - 12.0,
        x_label
    );
    let _ = writeln!(
        out,
        "  <text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>",
        h / 2.0,
        h / 2.0,
        y_label
    );
    for (v, x_anchor, y_pos, anchor) in [
        (x_min, px(x_min), h - m + 16.0, "middle"),
        (x_max, px(x_max), h - m + 16.0, "middle"),
    ] {
        let _ = writeln!(
            out,
            "  <text x=\"{x_anchor:.2}\" y=\"{y_pos:.2}\" font-size=\"10\" text-anchor=\"{anchor}\">{v:.4}</text>"
        );
    }
    for v in [y_min, y_max] {
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"end\">{v:.4}</text>",
            m - 4.0,
            py(v) + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}
