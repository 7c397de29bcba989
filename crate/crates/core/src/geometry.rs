//! Chords, circular arcs, caps, boundary curves and Stokes areas.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this opening angle the cap and arc length use their Taylor series.
pub const SERIES_CUTOFF: f64 = 1e-4;

/// Default bound on `max |σ_i|`.
pub const DEFAULT_GATE: f64 = 0.25;

const CHAIN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Counter-clockwise quarter turn.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// The seven domain parameters, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Param {
    A1,
    A2,
    A3,
    EpsT,
    EpsB,
    WingLeft,
    WingRight,
}

impl Param {
    pub const ALL: [Param; 7] = [
        Param::A1,
        Param::A2,
        Param::A3,
        Param::EpsT,
        Param::EpsB,
        Param::WingLeft,
        Param::WingRight,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Param::A1 => "a1",
            Param::A2 => "a2",
            Param::A3 => "a3",
            Param::EpsT => "eps_t",
            Param::EpsB => "eps_b",
            Param::WingLeft => "A_WL",
            Param::WingRight => "A_WR",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a1" => Ok(Param::A1),
            "a2" => Ok(Param::A2),
            "a3" => Ok(Param::A3),
            "eps_t" | "et" | "epsilon_t" => Ok(Param::EpsT),
            "eps_b" | "eb" | "epsilon_b" => Ok(Param::EpsB),
            "A_WL" | "a_wl" | "wl" => Ok(Param::WingLeft),
            "A_WR" | "a_wr" | "wr" => Ok(Param::WingRight),
            other => Err(Error::Invalid(format!("unknown parameter `{other}`"))),
        }
    }
}

/// σ = (a1, a2, a3, ε_t, ε_b, A_WL, A_WR) of a width-1 parabolic trapezoid.
///
/// The base vertices are (0,0), (0,½+a1), (1,½+a2) and (1,a3). The top curve
/// is `ε_t x² + (a2−a1−ε_t)x + a1 + ½`, the bottom `ε_b x² + (a3−ε_b)x`, and
/// the wings are areas attached to the left and right sides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub eps_t: f64,
    pub eps_b: f64,
    #[serde(rename = "A_WL")]
    pub wing_left: f64,
    #[serde(rename = "A_WR")]
    pub wing_right: f64,
}

impl DomainParams {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_array(v: [f64; 7]) -> Self {
        Self {
            a1: v[0],
            a2: v[1],
            a3: v[2],
            eps_t: v[3],
            eps_b: v[4],
            wing_left: v[5],
            wing_right: v[6],
        }
    }

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.a1,
            self.a2,
            self.a3,
            self.eps_t,
            self.eps_b,
            self.wing_left,
            self.wing_right,
        ]
    }

    pub fn get(&self, p: Param) -> f64 {
        self.to_array()[p.index()]
    }

    pub fn set(&mut self, p: Param, v: f64) {
        let mut a = self.to_array();
        a[p.index()] = v;
        *self = Self::from_array(a);
    }

    pub fn with(mut self, p: Param, v: f64) -> Self {
        self.set(p, v);
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Fails with [`Error::OutOfRegime`] naming the first offending entry.
    pub fn check_gate(&self, gate: f64) -> Result<()> {
        for p in Param::ALL {
            let v = self.get(p);
            if !v.is_finite() || v.abs() > gate {
                return Err(Error::OutOfRegime {
                    param: p.name().to_string(),
                    value: v,
                    gate,
                });
            }
        }
        Ok(())
    }

    pub fn top(&self) -> Parabola {
        Parabola {
            c2: self.eps_t,
            c1: self.a2 - self.a1 - self.eps_t,
            c0: self.a1 + 0.5,
        }
    }

    pub fn bottom(&self) -> Parabola {
        Parabola {
            c2: self.eps_b,
            c1: self.a3 - self.eps_b,
            c0: 0.0,
        }
    }

    /// Parameters of the domain reflected by `x ↦ 1−x` and shifted down by a3.
    ///
    /// Cuts map as `(q, p, θ) ↦ (1−q, 1−p, −θ)`.
    pub fn mirror(&self) -> Self {
        Self {
            a1: self.a2 - self.a3,
            a2: self.a1 - self.a3,
            a3: -self.a3,
            eps_t: self.eps_t,
            eps_b: self.eps_b,
            wing_left: self.wing_right,
            wing_right: self.wing_left,
        }
    }
}

/// `c2 x² + c1 x + c0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parabola {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Parabola {
    pub fn eval(&self, x: f64) -> f64 {
        (self.c2 * x + self.c1) * x + self.c0
    }

    pub fn slope(&self, x: f64) -> f64 {
        2.0 * self.c2 * x + self.c1
    }

    /// `½∫₀^X (x y′ − y) dx`, the Stokes contribution of the graph from 0 to X.
    pub fn half_cross_integral(&self, x: f64) -> f64 {
        0.5 * (self.c2 * x * x * x / 3.0 - self.c0 * x)
    }

    pub fn integral(&self, x0: f64, x1: f64) -> f64 {
        let f = |x: f64| ((self.c2 / 3.0 * x + self.c1 / 2.0) * x + self.c0) * x;
        f(x1) - f(x0)
    }

    /// The same graph over `[x0, x1]` as a quadratic Bézier curve.
    pub fn to_curve(&self, x0: f64, x1: f64) -> BoundaryCurve {
        let y0 = self.eval(x0);
        BoundaryCurve::Parabolic {
            from: Point::new(x0, y0),
            ctrl: Point::new(0.5 * (x0 + x1), y0 + 0.5 * self.slope(x0) * (x1 - x0)),
            to: Point::new(x1, self.eval(x1)),
        }
    }
}

/// Cut from `(q, y_B(q))` to `(p, y_T(p))`; `theta > 0` bulges toward +x so
/// the cap joins the left region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutParams {
    pub q: f64,
    pub p: f64,
    pub theta: f64,
}

impl CutParams {
    pub const CENTER: CutParams = CutParams {
        q: 0.5,
        p: 0.5,
        theta: 0.0,
    };

    pub fn new(q: f64, p: f64, theta: f64) -> Self {
        Self { q, p, theta }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.q, self.p, self.theta]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// Offset from (½, ½, 0).
    pub fn offset(&self) -> [f64; 3] {
        [self.q - 0.5, self.p - 0.5, self.theta]
    }

    pub fn dist(&self, o: &CutParams) -> f64 {
        let d = [self.q - o.q, self.p - o.p, self.theta - o.theta];
        d.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcGeometry {
    pub radius: f64,
    pub center: Point,
    pub chord: f64,
    pub opening_angle: f64,
}

impl ArcGeometry {
    /// Opening angle recovered from chord and radius, signed like the input.
    pub fn implied_angle(&self) -> f64 {
        let half = (self.chord / (2.0 * self.radius)).clamp(-1.0, 1.0).asin();
        2.0 * half * self.opening_angle.signum()
    }

    /// Sagitta: largest distance between the arc and its chord.
    pub fn sagitta(&self) -> f64 {
        0.5 * self.chord * (self.opening_angle.abs() / 4.0).tan()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    Straight,
    Parabolic,
    Circular,
}

/// One side of a domain.
///
/// Parabolic pieces are quadratic Bézier curves, which keeps them parabolic
/// under similarity transforms and splitting. A circular piece bulges to the
/// right of the directed chord `from → to` when `theta > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryCurve {
    Straight { from: Point, to: Point },
    Parabolic { from: Point, ctrl: Point, to: Point },
    Circular { from: Point, to: Point, theta: f64 },
}

impl BoundaryCurve {
    pub fn line(from: Point, to: Point) -> Self {
        BoundaryCurve::Straight { from, to }
    }

    /// A circular arc, or a segment when `theta == 0`.
    pub fn arc(from: Point, to: Point, theta: f64) -> Self {
        if theta == 0.0 {
            BoundaryCurve::Straight { from, to }
        } else {
            BoundaryCurve::Circular { from, to, theta }
        }
    }

    pub fn kind(&self) -> CurveKind {
        match self {
            BoundaryCurve::Straight { .. } => CurveKind::Straight,
            BoundaryCurve::Parabolic { .. } => CurveKind::Parabolic,
            BoundaryCurve::Circular { .. } => CurveKind::Circular,
        }
    }

    pub fn start(&self) -> Point {
        match *self {
            BoundaryCurve::Straight { from, .. }
            | BoundaryCurve::Parabolic { from, .. }
            | BoundaryCurve::Circular { from, .. } => from,
        }
    }

    pub fn end(&self) -> Point {
        match *self {
            BoundaryCurve::Straight { to, .. }
            | BoundaryCurve::Parabolic { to, .. }
            | BoundaryCurve::Circular { to, .. } => to,
        }
    }

    pub fn chord(&self) -> f64 {
        self.start().dist(self.end())
    }

    pub fn point(&self, t: f64) -> Point {
        match *self {
            BoundaryCurve::Straight { from, to } => from.lerp(to, t),
            BoundaryCurve::Parabolic { from, ctrl, to } => {
                let s = 1.0 - t;
                from * (s * s) + ctrl * (2.0 * s * t) + to * (t * t)
            }
            BoundaryCurve::Circular { from, to, theta } => {
                // chord frame, stable as θ → 0 where the centre runs off to infinity
                let (u, n, half) = chord_frame(from, to, theta);
                let phi = theta * (t - 0.5);
                let along = half * phi.sin();
                let across = 2.0 * half * (0.5 * theta * t).sin() * (0.5 * theta * (1.0 - t)).sin();
                from.lerp(to, 0.5) + u * along + n * across
            }
        }
    }

    pub fn derivative(&self, t: f64) -> Point {
        match *self {
            BoundaryCurve::Straight { from, to } => to - from,
            BoundaryCurve::Parabolic { from, ctrl, to } => {
                (ctrl - from) * (2.0 * (1.0 - t)) + (to - ctrl) * (2.0 * t)
            }
            BoundaryCurve::Circular { from, to, theta } => {
                let (u, n, half) = chord_frame(from, to, theta);
                let phi = theta * (t - 0.5);
                (u * phi.cos() - n * phi.sin()) * (half * theta)
            }
        }
    }

    pub fn reversed(&self) -> Self {
        match *self {
            BoundaryCurve::Straight { from, to } => BoundaryCurve::Straight { from: to, to: from },
            BoundaryCurve::Parabolic { from, ctrl, to } => BoundaryCurve::Parabolic {
                from: to,
                ctrl,
                to: from,
            },
            BoundaryCurve::Circular { from, to, theta } => BoundaryCurve::Circular {
                from: to,
                to: from,
                theta: -theta,
            },
        }
    }

    /// Splits at parameter `t` into the pieces over `[0,t]` and `[t,1]`.
    pub fn split(&self, t: f64) -> (Self, Self) {
        match *self {
            BoundaryCurve::Straight { from, to } => {
                let m = from.lerp(to, t);
                (
                    BoundaryCurve::Straight { from, to: m },
                    BoundaryCurve::Straight { from: m, to },
                )
            }
            BoundaryCurve::Parabolic { from, ctrl, to } => {
                let a = from.lerp(ctrl, t);
                let b = ctrl.lerp(to, t);
                let m = a.lerp(b, t);
                (
                    BoundaryCurve::Parabolic {
                        from,
                        ctrl: a,
                        to: m,
                    },
                    BoundaryCurve::Parabolic {
                        from: m,
                        ctrl: b,
                        to,
                    },
                )
            }
            BoundaryCurve::Circular { from, to, theta } => {
                let m = self.point(t);
                (
                    BoundaryCurve::arc(from, m, theta * t),
                    BoundaryCurve::arc(m, to, theta * (1.0 - t)),
                )
            }
        }
    }

    /// `½∫ x dy − y dx` along the curve.
    pub fn stokes(&self) -> f64 {
        match *self {
            BoundaryCurve::Straight { from, to } => 0.5 * from.cross(to),
            BoundaryCurve::Parabolic { from, ctrl, to } => {
                (2.0 * from.cross(ctrl) + 2.0 * ctrl.cross(to) + from.cross(to)) / 6.0
            }
            BoundaryCurve::Circular { from, to, theta } => {
                0.5 * from.cross(to) + cap_area(from.dist(to), theta).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Self {
        match *self {
            BoundaryCurve::Straight { from, to } => BoundaryCurve::Straight {
                from: f(from),
                to: f(to),
            },
            BoundaryCurve::Parabolic { from, ctrl, to } => BoundaryCurve::Parabolic {
                from: f(from),
                ctrl: f(ctrl),
                to: f(to),
            },
            BoundaryCurve::Circular { from, to, theta } => BoundaryCurve::Circular {
                from: f(from),
                to: f(to),
                theta,
            },
        }
    }

    /// Parameter `t ∈ [0,1]` at which the curve crosses the vertical line at `x`.
    pub fn param_at_x(&self, x: f64) -> Result<f64> {
        let (x0, x1) = (self.start().x, self.end().x);
        let (lo, hi) = (x0.min(x1), x0.max(x1));
        let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if !(x >= lo - tol && x <= hi + tol) || hi - lo <= 0.0 {
            return Err(Error::Domain(format!(
                "x = {x} outside curve interval [{lo}, {hi}]"
            )));
        }
        match *self {
            BoundaryCurve::Straight { from, to } => {
                Ok(((x - from.x) / (to.x - from.x)).clamp(0.0, 1.0))
            }
            BoundaryCurve::Parabolic { from, ctrl, to } => {
                let a = from.x - 2.0 * ctrl.x + to.x;
                let b = 2.0 * (ctrl.x - from.x);
                let c = from.x - x;
                if a.abs() <= 1e-14 * b.abs() {
                    return Ok((-c / b).clamp(0.0, 1.0));
                }
                let disc = b * b - 4.0 * a * c;
                if disc < -1e-14 * b * b {
                    return Err(Error::Geometry("parabolic side is not a graph".into()));
                }
                let sq = disc.max(0.0).sqrt();
                let qq = -0.5 * (b + b.signum() * sq);
                let roots = [qq / a, if qq != 0.0 { c / qq } else { f64::NAN }];
                roots
                    .iter()
                    .copied()
                    .filter(|t| t.is_finite() && *t >= -1e-9 && *t <= 1.0 + 1e-9)
                    .min_by(|u, v| (u - 0.5).abs().total_cmp(&(v - 0.5).abs()))
                    .map(|t| t.clamp(0.0, 1.0))
                    .ok_or_else(|| Error::Geometry("parabolic side is not a graph".into()))
            }
            BoundaryCurve::Circular { .. } => {
                // x(t) is monotone on a graph arc: safeguarded Newton.
                let increasing = x1 > x0;
                let (mut a, mut b) = (0.0_f64, 1.0_f64);
                let mut t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
                for _ in 0..100 {
                    let px = self.point(t).x;
                    let r = px - x;
                    if r == 0.0 {
                        break;
                    }
                    if (r < 0.0) == increasing {
                        a = t;
                    } else {
                        b = t;
                    }
                    let d = self.derivative(t).x;
                    let mut tn = t - r / d;
                    if !(tn > a && tn < b) || !tn.is_finite() {
                        tn = 0.5 * (a + b);
                    }
                    if (tn - t).abs() <= 1e-16 {
                        t = tn;
                        break;
                    }
                    t = tn;
                    if b - a <= 1e-17 {
                        break;
                    }
                }
                Ok(t)
            }
        }
    }

    pub fn sample(&self, n: usize) -> Vec<Point> {
        (0..=n).map(|k| self.point(k as f64 / n as f64)).collect()
    }
}

/// Unit chord, unit normal to the right of it and the radius `c / (2 sin(θ/2))`.
fn chord_frame(from: Point, to: Point, theta: f64) -> (Point, Point, f64) {
    let d = to - from;
    let c = d.norm();
    let u = d * (1.0 / c);
    (u, -u.perp(), 0.5 * c / (0.5 * theta).sin())
}

/// Distance between `(q, y_B(q))` and `(p, y_T(p))`.
pub fn chord_length(sigma: &DomainParams, cut: &CutParams) -> Result<f64> {
    for (name, v) in [("q", cut.q), ("p", cut.p)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let dx = cut.p - cut.q;
    let dy = sigma.top().eval(cut.p) - sigma.bottom().eval(cut.q);
    Ok(dx.hypot(dy))
}

fn check_angle(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta.abs() > std::f64::consts::PI {
        return Err(Error::Domain(format!("opening angle {theta} beyond ±π")));
    }
    Ok(())
}

pub fn arc_radius(chord: f64, theta: f64) -> Result<f64> {
    check_angle(theta)?;
    if theta == 0.0 {
        return Err(Error::StraightCut);
    }
    if !(chord > 0.0) {
        return Err(Error::Domain(format!("chord {chord} must be positive")));
    }
    Ok(chord / (2.0 * (0.5 * theta.abs()).sin()))
}

/// `θ − sin θ` without cancellation for small angles.
fn theta_minus_sin(theta: f64) -> f64 {
    if theta.abs() >= 1.0 {
        return theta - theta.sin();
    }
    let t2 = theta * theta;
    let mut term = theta * t2 / 6.0;
    let mut sum = term;
    let mut k = 3.0;
    while term.abs() > 1e-18 * sum.abs() {
        term *= -t2 / ((k + 1.0) * (k + 2.0));
        sum += term;
        k += 2.0;
    }
    sum
}

/// Signed area between a chord and its circular arc, odd in `theta`.
pub fn cap_area(chord: f64, theta: f64) -> Result<f64> {
    check_angle(theta)?;
    if theta.abs() < SERIES_CUTOFF {
        return Ok(chord * chord * (theta / 12.0 + theta.powi(3) / 360.0));
    }
    let s = (0.5 * theta).sin();
    Ok(chord * chord * theta_minus_sin(theta) / (8.0 * s * s))
}

pub fn arc_length(chord: f64, theta: f64) -> f64 {
    let t = theta.abs();
    if t < SERIES_CUTOFF {
        let t2 = t * t;
        return chord * (1.0 + t2 / 24.0 + 7.0 * t2 * t2 / 5760.0);
    }
    chord * (0.5 * t) / (0.5 * t).sin()
}

pub fn curve_eval(curve: &BoundaryCurve, x: f64) -> Result<f64> {
    let t = curve.param_at_x(x)?;
    Ok(curve.point(t).y)
}

/// Circle through `p0` and `p1` whose arc from `p0` to `p1` subtends `theta`
/// and bulges to the right of the chord for `theta > 0`.
pub fn circle_through(p0: Point, p1: Point, theta: f64) -> Result<ArcGeometry> {
    let d = p1 - p0;
    let chord = d.norm();
    if !(chord > 0.0) {
        return Err(Error::Geometry("degenerate chord".into()));
    }
    let radius = arc_radius(chord, theta)?;
    let half = 0.5 * theta;
    let offset = 0.5 * chord * half.cos() / half.sin();
    let center = p0.lerp(p1, 0.5) + d.perp() * (offset / chord);
    Ok(ArcGeometry {
        radius,
        center,
        chord,
        opening_angle: theta,
    })
}

/// Area enclosed by a closed counter-clockwise chain of curves.
pub fn stokes_area(curves: &[BoundaryCurve]) -> Result<f64> {
    if curves.is_empty() {
        return Err(Error::Geometry("empty loop".into()));
    }
    for (i, c) in curves.iter().enumerate() {
        let next = &curves[(i + 1) % curves.len()];
        let gap = c.end().dist(next.start());
        if gap > CHAIN_TOL {
            return Err(Error::OpenLoop { index: i, gap });
        }
    }
    let area: f64 = curves.iter().map(BoundaryCurve::stokes).sum();
    if !area.is_finite() {
        return Err(Error::Geometry("non-finite area".into()));
    }
    if area < 0.0 {
        return Err(Error::Orientation);
    }
    Ok(area)
}
