//! CSV and SVG writers for sweep results.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::sweep::SweepResult;

pub const CSV_HEADER: &str = "eta,q,d1,d2,delta_d,delta_d_analytic,delta_d_error,verdict";

pub fn csv_string(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(CliError::Usage("sweep produced no rows".into()));
    }
    let mut out = String::with_capacity(96 * (result.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.eta, r.q, r.d1, r.d2, r.delta_d, r.delta_d_analytic, r.delta_d_error, r.verdict
        );
    }
    Ok(out)
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let text = csv_string(result)?;
    write_file(path, &text)
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// `ΔD` against `η`, one polyline per `q`, with the `δD` floor dashed.
pub fn svg_string(result: &SweepResult) -> Result<String> {
    if result.rows.is_empty() {
        return Err(CliError::Usage("sweep produced no rows".into()));
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (-result.delta_d_floor, result.delta_d_floor);
    for r in &result.rows {
        x0 = x0.min(r.eta);
        x1 = x1.max(r.eta);
        y0 = y0.min(r.delta_d);
        y1 = y1.max(r.delta_d);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            s,
            r#"<line class="zero" x1="{MARGIN}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="gray" stroke-width="0.5"/>"#,
            WIDTH - MARGIN,
            y = py(0.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<line class="floor" x1="{MARGIN}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="black" stroke-dasharray="6,4"/>"#,
        WIDTH - MARGIN,
        y = py(result.delta_d_floor)
    );
    for (k, &q) in result.q_values.iter().enumerate() {
        let points: Vec<String> = result
            .series(q)
            .map(|r| format!("{:.2},{:.2}", px(r.eta), py(r.delta_d)))
            .collect();
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-q="{q}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">q = {q}</text>"#,
            WIDTH - MARGIN + 8.0,
            MARGIN + 16.0 * (k as f64 + 1.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">eta ({x0} to {x1})</text>"#,
        WIDTH / 2.0,
        HEIGHT - MARGIN / 3.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 {} {})">delta D ({mode})</text>"#,
        MARGIN / 3.0,
        HEIGHT / 2.0,
        MARGIN / 3.0,
        HEIGHT / 2.0,
        mode = result.mode
    );
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(result: &SweepResult, path: &Path) -> Result<()> {
    let text = svg_string(result)?;
    write_file(path, &text)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Mode, SweepConfig};
    use crate::sweep::run_sweep;

    fn result() -> SweepResult {
        run_sweep(&SweepConfig {
            eta_min: 0.0,
            eta_max: 0.1,
            eta_steps: 5,
            ..SweepConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn csv_layout() {
        let text = csv_string(&result()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 16);
        assert!(lines[1].starts_with("0,0,1,1,0,0,"));
        assert!(lines[1].ends_with(",Inconclusive"));
        assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 8));
    }

    #[test]
    fn svg_has_one_series_per_q() {
        let svg = svg_string(&result()).unwrap();
        assert_eq!(svg.matches(r#"<polyline class="series""#).count(), 3);
        assert_eq!(svg.matches(r#"class="floor""#).count(), 1);
    }

    #[test]
    fn empty_result_rejected() {
        let empty = SweepResult {
            mode: Mode::Map,
            q_values: vec![0.0],
            delta_d_floor: 0.0,
            rows: vec![],
        };
        assert!(matches!(csv_string(&empty), Err(CliError::Usage(_))));
        assert!(matches!(svg_string(&empty), Err(CliError::Usage(_))));
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = emit_csv(&result(), Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
