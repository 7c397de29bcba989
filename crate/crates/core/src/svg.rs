//! Minimal deterministic SVG output: line plots, domain drawings and
//! scatter plots. Coordinates are printed with fixed precision so equal
//! inputs give equal bytes.

use std::fmt::Write as _;

use crate::geometry::Point;

pub const DOT_DASH: &str = "8,3,2,3";

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64, dash: Option<&str>) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (k, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{x:.3},{y:.3}", if k == 0 { "" } else { " " });
        }
        let dash = dash.map_or(String::new(), |s| format!(" stroke-dasharray=\"{s}\""));
        let _ = writeln!(
            self.body,
            "<polyline points=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"{dash}/>"
        );
    }

    pub fn polygon(&mut self, pts: &[(f64, f64)], stroke: &str, fill: &str) {
        let mut d = String::new();
        for (k, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{x:.3},{y:.3}", if k == 0 { "" } else { " " });
        }
        let _ = writeln!(
            self.body,
            "<polygon points=\"{d}\" fill=\"{fill}\" stroke=\"{stroke}\" stroke-width=\"1\"/>"
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{r}\" fill=\"{fill}\"/>"
        );
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str) {
        let _ = writeln!(
            self.body,
            "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"{stroke}\" stroke-width=\"1\"/>",
            a.0, a.1, b.0, b.1
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.3}\" y=\"{y:.3}\" font-size=\"{size}\" font-family=\"sans-serif\" text-anchor=\"{anchor}\">{}</text>",
            esc(s)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

pub struct Series<'a> {
    pub label: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub color: &'a str,
    pub dash: Option<&'a str>,
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Line plot of several series sharing the axes; non-finite values break lines.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (w, h, m) = (640.0, 420.0, 70.0);
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.xs.iter().copied()));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.ys.iter().copied()));
    let px = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let py = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut svg = Svg::new(w, h);
    svg.line((m, h - m), (w - m, h - m), "black");
    svg.line((m, h - m), (m, m), "black");
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        svg.line((px(xv), h - m), (px(xv), h - m + 5.0), "black");
        svg.text(px(xv), h - m + 18.0, 11.0, "middle", &format!("{xv:.4}"));
        svg.line((m - 5.0, py(yv)), (m, py(yv)), "black");
        svg.text(m - 8.0, py(yv) + 4.0, 11.0, "end", &format!("{yv:.3e}"));
    }
    svg.text(w / 2.0, 24.0, 15.0, "middle", title);
    svg.text(w / 2.0, h - 18.0, 13.0, "middle", xlabel);
    svg.text(16.0, h / 2.0, 13.0, "middle", ylabel);
    for (k, s) in series.iter().enumerate() {
        let mut run = Vec::new();
        for (x, y) in s.xs.iter().zip(s.ys) {
            if x.is_finite() && y.is_finite() {
                run.push((px(*x), py(*y)));
            } else {
                svg.polyline(&run, s.color, 2.0, s.dash);
                run.clear();
            }
        }
        svg.polyline(&run, s.color, 2.0, s.dash);
        let ly = m + 16.0 * k as f64;
        svg.polyline(
            &[(w - m - 120.0, ly), (w - m - 90.0, ly)],
            s.color,
            2.0,
            s.dash,
        );
        svg.text(w - m - 84.0, ly + 4.0, 11.0, "start", s.label);
    }
    svg.finish()
}

/// A closed outline with open curves drawn on top, in data coordinates.
pub struct Drawing<'a> {
    pub outline: &'a [Point],
    pub curves: Vec<(Vec<Point>, &'a str, Option<&'a str>)>,
    pub caption: String,
}

fn frame_of<'a>(drawings: impl Iterator<Item = &'a Drawing<'a>>) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for d in drawings {
        for p in d
            .outline
            .iter()
            .chain(d.curves.iter().flat_map(|c| c.0.iter()))
        {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    (lo, hi)
}

/// Drawings side by side, each scaled to fit its own cell.
pub fn filmstrip(drawings: &[Drawing]) -> String {
    let cell = 260.0;
    let pad = 20.0;
    let mut svg = Svg::new(cell * drawings.len().max(1) as f64, cell + 30.0);
    for (k, d) in drawings.iter().enumerate() {
        let (lo, hi) = frame_of(std::iter::once(d));
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        let s = (cell - 2.0 * pad) / span;
        let ox = k as f64 * cell + pad;
        let map = |p: &Point| (ox + (p.x - lo.x) * s, cell - pad - (p.y - lo.y) * s);
        let outline: Vec<(f64, f64)> = d.outline.iter().map(map).collect();
        svg.polygon(&outline, "black", "#eef3fb");
        for (pts, color, dash) in &d.curves {
            let v: Vec<(f64, f64)> = pts.iter().map(map).collect();
            svg.polyline(&v, color, 2.0, *dash);
        }
        svg.text(
            ox + cell / 2.0 - pad,
            cell + 16.0,
            12.0,
            "middle",
            &d.caption,
        );
    }
    svg.finish()
}

/// Points colored by side.
pub fn scatter(points: &[Point], side: &[bool], title: &str) -> String {
    let (w, m) = (640.0, 30.0);
    let (lo, hi) = points.iter().fold(
        (
            Point::new(f64::INFINITY, f64::INFINITY),
            Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        ),
        |(a, b), p| {
            (
                Point::new(a.x.min(p.x), a.y.min(p.y)),
                Point::new(b.x.max(p.x), b.y.max(p.y)),
            )
        },
    );
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let s = (w - 2.0 * m) / span;
    let h = (hi.y - lo.y) * s + 2.0 * m + 20.0;
    let mut svg = Svg::new(w, h);
    svg.text(w / 2.0, 18.0, 14.0, "middle", title);
    for (p, &k) in points.iter().zip(side) {
        let color = if k { "#d62728" } else { "#1f77b4" };
        svg.circle(m + (p.x - lo.x) * s, h - m - (p.y - lo.y) * s, 2.0, color);
    }
    svg.finish()
}
