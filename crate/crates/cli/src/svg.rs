//! Minimal standalone SVG 1.1 plots: shaded stability regions and line
//! charts of trajectories.

use std::fmt::Write as _;

use qpisde::stability::RegionGrid;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Tick positions at a 1-2-5 step covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0 && span.is_finite()) {
        return vec![lo];
    }
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - TOP - BOTTOM)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="11">"#);
    for t in ticks(frame.x_lo, frame.x_hi) {
        let x = frame.px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick_label(t)
        );
    }
    for t in ticks(frame.y_lo, frame.y_hi) {
        let y = frame.py(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

/// Stable cells shaded; drift on the horizontal axis, step size on the
/// vertical axis. Each axis point owns a cell centered on it.
pub fn stability_region(region: &RegionGrid) -> String {
    let half = |axis: &[f64]| (axis[1] - axis[0]) / 2.0;
    let (mu, dt) = (&region.mu_axis, &region.dt_axis);
    let frame = Frame {
        x_lo: mu[0] - half(mu),
        x_hi: mu[mu.len() - 1] + half(mu),
        y_lo: dt[0] - half(dt),
        y_hi: dt[dt.len() - 1] + half(dt),
    };
    let title = format!(
        "Stability region: {}, \u{3c3} = {}",
        region.condition.label(),
        region.sigma
    );

    let mut out = String::new();
    header(&mut out, &title);
    let _ = writeln!(out, r##"<g fill="#7fa7d9" stroke="none">"##);
    for (i, &m) in mu.iter().enumerate() {
        let x_left = frame.px(m - half(mu));
        let width = frame.px(m + half(mu)) - x_left;
        // Merge vertical runs of stable cells into one rectangle.
        let mut j = 0;
        while j < dt.len() {
            if !region.is_stable(i, j) {
                j += 1;
                continue;
            }
            let start = j;
            while j < dt.len() && region.is_stable(i, j) {
                j += 1;
            }
            let y_top = frame.py(dt[j - 1] + half(dt));
            let y_bottom = frame.py(dt[start] - half(dt));
            let _ = writeln!(
                out,
                r#"<rect x="{x_left:.2}" y="{y_top:.2}" width="{width:.2}" height="{:.2}"/>"#,
                y_bottom - y_top
            );
        }
    }
    let _ = writeln!(out, "</g>");
    axes(&mut out, &frame, "\u{3bc}", "\u{394}t");
    out.push_str("</svg>\n");
    out
}

pub struct Series<'a> {
    pub name: String,
    pub values: &'a [f64],
    pub dashed: bool,
}

/// Line chart of several series sharing the time axis.
pub fn line_chart(title: &str, times: &[f64], series: &[Series<'_>]) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.values.iter())
        .copied()
        .filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if !(lo.is_finite() && hi.is_finite()) {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let frame = Frame {
        x_lo: times[0],
        x_hi: times[times.len() - 1],
        y_lo: lo - pad,
        y_hi: hi + pad,
    };

    let mut out = String::new();
    header(&mut out, title);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        for (t, v) in times.iter().zip(s.values) {
            if v.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", frame.px(*t), frame.py(*v));
            }
        }
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"><title>{}</title></polyline>"#,
            points.trim_end(),
            escape(&s.name)
        );
    }
    if series.len() <= 12 {
        let _ = writeln!(out, r#"<g font-family="sans-serif" font-size="11">"#);
        for (k, s) in series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let y = TOP + 14.0 + 14.0 * k as f64;
            let x = WIDTH - RIGHT - 110.0;
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
                y - 4.0,
                x + 20.0,
                y - 4.0,
                x + 25.0,
                y,
                escape(&s.name)
            );
        }
        let _ = writeln!(out, "</g>");
    }
    axes(&mut out, &frame, "t", "X(t)");
    out.push_str("</svg>\n");
    out
}
