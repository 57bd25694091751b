//! Minimal deterministic SVG line charts.

use std::fmt::Write as _;

const W: f64 = 800.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 70.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f4e79", "#c0392b", "#27ae60", "#8e44ad", "#d68910", "#566573"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub y: Vec<f64>,
    pub axis: Axis,
}

#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub y2_label: String,
    /// Abscissa shared by all series; `0..n` when empty.
    pub x: Vec<f64>,
    /// Tick labels replacing numeric x ticks, indexed like `x`.
    pub x_tick_labels: Vec<String>,
    pub series: Vec<Series>,
    /// Dashed horizontal reference line on the left axis.
    pub hline: Option<f64>,
}

impl LineChart {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), ..Default::default() }
    }

    pub fn series(mut self, label: impl Into<String>, y: Vec<f64>) -> Self {
        self.series.push(Series { label: label.into(), y, axis: Axis::Left });
        self
    }

    pub fn series_right(mut self, label: impl Into<String>, y: Vec<f64>) -> Self {
        self.series.push(Series { label: label.into(), y, axis: Axis::Right });
        self
    }

    pub fn labels(mut self, x: &str, y: &str) -> Self {
        self.x_label = x.into();
        self.y_label = y.into();
        self
    }

    pub fn render(&self) -> String {
        let n = self.series.iter().map(|s| s.y.len()).max().unwrap_or(0);
        let xs: Vec<f64> = if self.x.is_empty() { (0..n).map(|i| i as f64).collect() } else { self.x.clone() };
        let (x0, x1) = padded(range(xs.iter().copied()), false);
        let left = self.axis_range(Axis::Left);
        let right = self.axis_range(Axis::Right);
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
        let sy = |v: f64, (lo, hi): (f64, f64)| TOP + (hi - v) / (hi - lo) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, esc(&self.title));
        let _ = writeln!(
            s,
            r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
        );

        for t in ticks(left.0, left.1) {
            let y = sy(t, left);
            let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, fmt_tick(t));
        }
        if self.has(Axis::Right) {
            for t in ticks(right.0, right.1) {
                let y = sy(t, right);
                let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, LEFT + pw + 6.0, y + 4.0, fmt_tick(t));
            }
        }
        if self.x_tick_labels.is_empty() {
            for t in ticks(x0, x1) {
                let x = sx(t);
                let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, fmt_tick(t));
            }
        } else {
            let k = self.x_tick_labels.len();
            let every = (k / 6).max(1);
            for i in (0..k).step_by(every) {
                let x = sx(xs.get(i).copied().unwrap_or(i as f64));
                let _ = writeln!(
                    s,
                    r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    TOP + ph + 16.0,
                    esc(&self.x_tick_labels[i])
                );
            }
        }
        if let Some(h) = self.hline {
            if h >= left.0 && h <= left.1 {
                let y = sy(h, left);
                let _ = writeln!(
                    s,
                    r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
                    LEFT + pw
                );
            }
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 14.0, esc(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );
        if self.has(Axis::Right) {
            let _ = writeln!(
                s,
                r#"<text transform="translate({:.2} {:.2}) rotate(90)" text-anchor="middle">{}</text>"#,
                W - 16.0,
                TOP + ph / 2.0,
                esc(&self.y2_label)
            );
        }

        for (i, ser) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let r = if ser.axis == Axis::Left { left } else { right };
            let mut d = String::new();
            let mut pen_up = true;
            for (j, &v) in ser.y.iter().enumerate() {
                let Some(&xv) = xs.get(j) else { break };
                if !v.is_finite() {
                    pen_up = true;
                    continue;
                }
                let _ = write!(d, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, sx(xv), sy(v, r));
                pen_up = false;
            }
            let dash = if ser.axis == Axis::Right { r#" stroke-dasharray="6 3""# } else { "" };
            let _ = writeln!(
                s,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                d.trim_end()
            );
            let ly = TOP + 14.0 + 16.0 * i as f64;
            let lx = LEFT + 10.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
                ly - 4.0,
                lx + 20.0,
                ly - 4.0
            );
            let _ = writeln!(s, r#"<text x="{}" y="{ly:.2}">{}</text>"#, lx + 26.0, esc(&ser.label));
        }
        s.push_str("</svg>\n");
        s
    }

    fn has(&self, a: Axis) -> bool {
        self.series.iter().any(|s| s.axis == a)
    }

    fn axis_range(&self, a: Axis) -> (f64, f64) {
        let mut vals: Vec<f64> = self.series.iter().filter(|s| s.axis == a).flat_map(|s| s.y.iter().copied()).collect();
        if a == Axis::Left {
            vals.extend(self.hline);
        }
        padded(range(vals.into_iter()), true)
    }
}

fn range(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn padded((lo, hi): (f64, f64), pad: bool) -> (f64, f64) {
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let d = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - d, hi + d);
    }
    if pad {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    } else {
        (lo, hi)
    }
}

/// Round tick positions, about five per axis.
pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    if !raw.is_finite() || raw <= 0.0 {
        return vec![lo];
    }
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
