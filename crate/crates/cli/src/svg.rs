//! Minimal static SVG rendering: line charts and heatmaps with contours.

use std::fmt::Write;

use rfsqueeze_core::phase_space::Polyline;
use rfsqueeze_core::WignerGrid;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 6] = ["#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#444444"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Solid,
    Dashed,
    Markers,
}

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    /// Symmetric error bars drawn with `Style::Markers`.
    pub y_err: Option<&'a [f64]>,
    pub style: Style,
}

impl<'a> Series<'a> {
    pub fn line(label: &'a str, x: &'a [f64], y: &'a [f64]) -> Self {
        Self { label, x, y, y_err: None, style: Style::Solid }
    }

    pub fn dashed(label: &'a str, x: &'a [f64], y: &'a [f64]) -> Self {
        Self { label, x, y, y_err: None, style: Style::Dashed }
    }

    pub fn markers(label: &'a str, x: &'a [f64], y: &'a [f64], y_err: Option<&'a [f64]>) -> Self {
        Self { label, x, y, y_err, style: Style::Markers }
    }
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub series: Vec<Series<'a>>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = values
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
            let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
            lo -= pad;
            hi += pad;
        } else if !log {
            let pad = 0.04 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi, log }
    }

    fn fraction(&self, v: f64) -> f64 {
        if self.log {
            (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().ceil() as i32, self.hi.log10().floor() as i32);
            return (a..=b).map(|e| 10f64.powi(e)).collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let start = (self.lo / step).ceil() as i64;
        let end = (self.hi / step).floor() as i64;
        (start..=end).map(|k| k as f64 * step).collect()
    }
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = write!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>
"##,
        width / 2.0,
        escape(title)
    );
}

pub fn line_chart(chart: &Chart) -> String {
    let xs = Axis::new(chart.series.iter().flat_map(|s| s.x.iter().copied()), chart.log_x);
    let ys = Axis::new(
        chart.series.iter().flat_map(|s| {
            let err = s.y_err;
            s.y.iter().enumerate().flat_map(move |(k, &y)| {
                let e = err.map_or(0.0, |e| e[k]);
                [y - e, y + e]
            })
        }),
        false,
    );
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + xs.fraction(x) * pw;
    let py = |y: f64| TOP + (1.0 - ys.fraction(y)) * ph;

    let mut out = String::new();
    header(&mut out, WIDTH, HEIGHT, chart.title);
    let _ = writeln!(out, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>"##);
    for t in xs.ticks() {
        let x = px(t);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{TOP}" stroke="#eee"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 16.0,
            label(t)
        );
    }
    for t in ys.ticks() {
        let y = py(t);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#eee"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0,
            label(t)
        );
    }
    if ys.lo < 0.0 && ys.hi > 0.0 {
        let y = py(0.0);
        let _ = writeln!(out, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#999"/>"##, LEFT + pw);
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(chart.x_label)
    );
    let _ = writeln!(
        out,
        r##"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"##,
        TOP + ph / 2.0,
        escape(chart.y_label)
    );

    for (k, s) in chart.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<(f64, f64)> = s
            .x
            .iter()
            .zip(s.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!xs.log || **x > 0.0))
            .map(|(&x, &y)| (px(x), py(y)))
            .collect();
        match s.style {
            Style::Solid | Style::Dashed => {
                let dash = if s.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let path: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    out,
                    r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"##,
                    path.join(" ")
                );
            }
            Style::Markers => {
                for (i, (x, y)) in points.iter().enumerate() {
                    if let Some(err) = s.y_err {
                        let (lo, hi) = (py(s.y[i] - err[i]), py(s.y[i] + err[i]));
                        let _ = writeln!(
                            out,
                            r##"<line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{hi:.2}" stroke="{color}"/>"##
                        );
                    }
                    let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"##);
                }
            }
        }
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let lx = LEFT + pw - 180.0;
        let _ = writeln!(
            out,
            r##"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{ly:.2}">{}</text>"##,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0,
            lx + 26.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Diverging blue-white-red colour for `v / scale` in [-1, 1].
fn diverging(v: f64, scale: f64) -> String {
    let t = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let (r, g, b) = if t >= 0.0 {
        (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
    } else {
        (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

/// Square heatmap of a Wigner grid with contour polylines on top.
pub fn heatmap(title: &str, grid: &WignerGrid, contours: &[Polyline]) -> String {
    let size = 420.0;
    let (left, top) = (56.0, 36.0);
    let n1 = grid.x1_axis.len();
    let n2 = grid.x2_axis.len();
    let (x_lo, x_hi) = (grid.x1_axis[0], grid.x1_axis[n1 - 1]);
    let (y_lo, y_hi) = (grid.x2_axis[0], grid.x2_axis[n2 - 1]);
    let cw = size / n1 as f64;
    let ch = size / n2 as f64;
    let px = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * (size - cw) + cw / 2.0;
    let py = |y: f64| top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * (size - ch) + ch / 2.0;
    let scale = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut out = String::new();
    header(&mut out, size + left + 24.0, size + top + 48.0, title);
    for j in 0..n2 {
        for i in 0..n1 {
            let v = grid.at(i, j);
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.3}" height="{:.3}" fill="{}"/>"##,
                px(grid.x1_axis[i]) - cw / 2.0,
                py(grid.x2_axis[j]) - ch / 2.0,
                cw + 0.05,
                ch + 0.05,
                diverging(v, scale)
            );
        }
    }
    for line in contours {
        let pts: Vec<String> = line.points.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let tag = if line.closed { "polygon" } else { "polyline" };
        let _ = writeln!(out, r##"<{tag} points="{}" fill="none" stroke="black" stroke-width="1.5"/>"##, pts.join(" "));
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">x1</text><text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">x2</text>"##,
        left + size / 2.0,
        top + size + 32.0,
        top + size / 2.0
    );
    for (value, x) in [(x_lo, left), (x_hi, left + size)] {
        let _ = writeln!(out, r##"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##, top + size + 16.0, label(value));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_is_well_formed() {
        let x = [0.1, 1.0, 10.0];
        let y = [-0.01, 0.0, 0.02];
        let doc = line_chart(&Chart {
            title: "a < b",
            x_label: "s",
            y_label: "N",
            log_x: true,
            series: vec![Series::line("ideal", &x, &y), Series::markers("data", &x, &y, Some(&[0.001; 3]))],
        });
        assert!(doc.starts_with("<svg") && doc.trim_end().ends_with("</svg>"));
        assert!(doc.contains("a &lt; b"));
        assert_eq!(doc.matches("<circle").count(), 3);
    }

    #[test]
    fn linear_ticks_are_round() {
        let axis = Axis { lo: -0.031, hi: 0.02, log: false };
        let ticks = axis.ticks();
        assert!(ticks.contains(&0.0));
        assert!(ticks.iter().all(|t| ((t * 100.0).round() - t * 100.0).abs() < 1e-9));
    }
}
