//! Minimal static SVG plots: line and scatter charts with axes, ticks, and
//! a legend.  Output is deterministic (fixed canvas, fixed palette,
//! two-decimal coordinates), so identical data produces identical files.

use std::fmt::Write as _;

/// Canvas size (px).
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
/// Margins around the plot area (left, right, top, bottom).
const MARGIN: [f64; 4] = [70.0, 20.0, 40.0, 55.0];
/// Per-series stroke colors, cycled.
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// One named data series.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Series {
    pub fn new(label: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { label: label.to_string(), x, y }
    }
}

/// Inclusive data range along one axis with a zero-span guard.
fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Tick label: trims trailing zeros from a six-decimal rendering.
fn tick_label(v: f64) -> String {
    if v.abs() >= 1e5 {
        return format!("{v:.3e}");
    }
    let mut s = format!("{v:.6}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn from_series(series: &[Series]) -> Self {
        let (x_lo, x_hi) = axis_range(series.iter().flat_map(|s| s.x.iter().copied()));
        let (y_lo, y_hi) = axis_range(series.iter().flat_map(|s| s.y.iter().copied()));
        Self { x_lo, x_hi, y_lo, y_hi }
    }

    fn px(&self, x: f64) -> f64 {
        let w = WIDTH - MARGIN[0] - MARGIN[1];
        MARGIN[0] + (x - self.x_lo) / (self.x_hi - self.x_lo) * w
    }

    fn py(&self, y: f64) -> f64 {
        let h = HEIGHT - MARGIN[2] - MARGIN[3];
        HEIGHT - MARGIN[3] - (y - self.y_lo) / (self.y_hi - self.y_lo) * h
    }
}

fn open_svg(out: &mut String, title: &str, x_label: &str, y_label: &str, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // Plot frame.
    let (x0, x1) = (MARGIN[0], WIDTH - MARGIN[1]);
    let (y0, y1) = (MARGIN[2], HEIGHT - MARGIN[3]);
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333"/>"##,
        x1 - x0,
        y1 - y0
    );

    // Ticks, grid lines, and labels: five divisions per axis.
    for i in 0..=5 {
        let fx = frame.x_lo + (frame.x_hi - frame.x_lo) * i as f64 / 5.0;
        let px = frame.px(fx);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{y1:.2}" stroke="#dddddd"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
            y1 + 18.0,
            tick_label(fx)
        );
        let fy = frame.y_lo + (frame.y_hi - frame.y_lo) * i as f64 / 5.0;
        let py = frame.py(fy);
        let _ = writeln!(
            out,
            r##"<line x1="{x0:.2}" y1="{py:.2}" x2="{x1:.2}" y2="{py:.2}" stroke="#dddddd"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="12">{}</text>"#,
            x0 - 6.0,
            py + 4.0,
            tick_label(fy)
        );
    }

    // Axis labels.
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN[2] + 16.0 + 18.0 * i as f64;
        let x = WIDTH - MARGIN[1] - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
            x + 24.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            x + 30.0,
            y + 4.0,
            escape(&s.label)
        );
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Polyline chart of the given series.  Non-finite samples break the line.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let frame = Frame::from_series(series);
    let mut out = String::new();
    open_svg(&mut out, title, x_label, y_label, &frame);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        let mut segments: Vec<String> = Vec::new();
        for (&x, &y) in s.x.iter().zip(&s.y) {
            if x.is_finite() && y.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", frame.px(x), frame.py(y));
            } else if !points.is_empty() {
                segments.push(std::mem::take(&mut points));
            }
        }
        if !points.is_empty() {
            segments.push(points);
        }
        for seg in segments {
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                seg.trim_end()
            );
        }
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

/// Scatter chart of the given series.  Non-finite samples are skipped.
pub fn scatter_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let frame = Frame::from_series(series);
    let mut out = String::new();
    open_svg(&mut out, title, x_label, y_label, &frame);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for (&x, &y) in s.x.iter().zip(&s.y) {
            if x.is_finite() && y.is_finite() {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                    frame.px(x),
                    frame.py(y)
                );
            }
        }
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}
