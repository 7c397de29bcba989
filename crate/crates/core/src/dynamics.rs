//! Iterated cuts of curvilinear quadrilaterals.
//!
//! Each step normalizes the current domain to width 1, fits the parabolic
//! trapezoid parameters, cuts it with the optimal arc and keeps one child.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    curve_eval, stokes_area, BoundaryCurve, CurveKind, CutParams, DomainParams, Point, DEFAULT_GATE,
};
use crate::numdiff::polyfit;
use crate::perturbation::{predict_cut_gated, Order};
use crate::ratiocut::{
    minimize_cut, CutDomain, OptimizeOptions, OptimizeReport, SeedSource, TrapezoidDomain,
};
use crate::svg::{filmstrip, Drawing};

const CLOSE_TOL: f64 = 1e-9;
const OUTLINE_SAMPLES: usize = 128;
const IQ_SAMPLES: usize = 100;
const FIT_SAMPLES: usize = 33;
const FIT_WINDOW: (f64, f64) = (0.3, 0.7);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Original,
    CutArc,
}

/// `p ↦ scale · R(p) + (tx, ty)` with `R` the rotation by (cos, sin).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub scale: f64,
    pub cos: f64,
    pub sin: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        scale: 1.0,
        cos: 1.0,
        sin: 0.0,
        tx: 0.0,
        ty: 0.0,
    };

    fn rotate(&self, p: Point) -> Point {
        Point::new(
            self.cos * p.x - self.sin * p.y,
            self.sin * p.x + self.cos * p.y,
        )
    }

    pub fn apply(&self, p: Point) -> Point {
        let r = self.rotate(p);
        Point::new(self.scale * r.x + self.tx, self.scale * r.y + self.ty)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Similarity) -> Similarity {
        let t = other.apply(Point::new(self.tx, self.ty));
        Similarity {
            scale: self.scale * other.scale,
            cos: other.cos * self.cos - other.sin * self.sin,
            sin: other.sin * self.cos + other.cos * self.sin,
            tx: t.x,
            ty: t.y,
        }
    }
}

/// Four sides in counter-clockwise order: bottom (BL→BR), right (BR→TR),
/// top (TR→TL) and left (TL→BL).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvilinearQuad {
    pub sides: [BoundaryCurve; 4],
    pub provenance: [Provenance; 4],
    /// Interior angles at BL, BR, TR, TL.
    pub angles: [f64; 4],
    pub area: f64,
    #[serde(skip)]
    outline: Vec<Point>,
}

fn unit(p: Point) -> Point {
    p * (1.0 / p.norm())
}

fn start_tangent(c: &BoundaryCurve) -> Point {
    let d = c.derivative(0.0);
    if d.norm() > 1e-14 {
        d
    } else {
        c.end() - c.start()
    }
}

fn end_tangent(c: &BoundaryCurve) -> Point {
    let d = c.derivative(1.0);
    if d.norm() > 1e-14 {
        d
    } else {
        c.end() - c.start()
    }
}

/// Interior angle between an incoming and an outgoing tangent of a
/// counter-clockwise loop.
fn corner_angle(incoming: Point, outgoing: Point) -> f64 {
    let back = -incoming;
    outgoing
        .cross(back)
        .atan2(outgoing.dot(back))
        .rem_euclid(TAU)
}

/// Parabolic bulge over the segment with the given signed outward area.
fn bulge(from: Point, to: Point, area: f64) -> BoundaryCurve {
    if area == 0.0 {
        return BoundaryCurve::line(from, to);
    }
    let d = to - from;
    let c = d.norm();
    // right of travel is outward on a counter-clockwise loop
    let outward = -d.perp() * (1.0 / c);
    BoundaryCurve::Parabolic {
        from,
        ctrl: from.lerp(to, 0.5) + outward * (3.0 * area / c),
        to,
    }
}

fn curve_length(c: &BoundaryCurve) -> f64 {
    match c.kind() {
        CurveKind::Straight => c.chord(),
        _ => c.sample(256).windows(2).map(|w| w[0].dist(w[1])).sum(),
    }
}

impl CurvilinearQuad {
    pub fn new(sides: [BoundaryCurve; 4], provenance: [Provenance; 4]) -> Result<Self> {
        let area = stokes_area(&sides)?;
        let angles = std::array::from_fn(|k| {
            corner_angle(end_tangent(&sides[(k + 3) % 4]), start_tangent(&sides[k]))
        });
        let outline = sides
            .iter()
            .flat_map(|s| {
                (0..OUTLINE_SAMPLES).map(move |k| s.point(k as f64 / OUTLINE_SAMPLES as f64))
            })
            .collect();
        Ok(Self {
            sides,
            provenance,
            angles,
            area,
            outline,
        })
    }

    pub fn polygon(corners: [Point; 4]) -> Result<Self> {
        let sides = std::array::from_fn(|k| BoundaryCurve::line(corners[k], corners[(k + 1) % 4]));
        Self::new(sides, [Provenance::Original; 4])
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        Self::polygon([
            Point::new(0.0, 0.0),
            Point::new(width, 0.0),
            Point::new(width, height),
            Point::new(0.0, height),
        ])
    }

    /// Isosceles right triangle with unit legs, its hypotenuse split at the
    /// midpoint so that one corner is straight.
    pub fn triangle() -> Result<Self> {
        Self::polygon([
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 0.5),
            Point::new(0.0, 1.0),
        ])
    }

    /// The parabolic trapezoid of σ with wings realized as parabolic bulges
    /// of the left and right sides.
    pub fn from_sigma(s: &DomainParams) -> Result<Self> {
        let bl = Point::new(0.0, 0.0);
        let br = Point::new(1.0, s.a3);
        let tr = Point::new(1.0, 0.5 + s.a2);
        let tl = Point::new(0.0, 0.5 + s.a1);
        let bottom = match s.bottom().to_curve(0.0, 1.0) {
            BoundaryCurve::Parabolic { ctrl, .. } if s.eps_b != 0.0 => BoundaryCurve::Parabolic {
                from: bl,
                ctrl,
                to: br,
            },
            _ => BoundaryCurve::line(bl, br),
        };
        let top = match s.top().to_curve(1.0, 0.0) {
            BoundaryCurve::Parabolic { ctrl, .. } if s.eps_t != 0.0 => BoundaryCurve::Parabolic {
                from: tr,
                ctrl,
                to: tl,
            },
            _ => BoundaryCurve::line(tr, tl),
        };
        Self::new(
            [
                bottom,
                bulge(br, tr, s.wing_right),
                top,
                bulge(tl, bl, s.wing_left),
            ],
            [Provenance::Original; 4],
        )
    }

    pub fn bottom(&self) -> &BoundaryCurve {
        &self.sides[0]
    }

    pub fn right(&self) -> &BoundaryCurve {
        &self.sides[1]
    }

    pub fn top(&self) -> &BoundaryCurve {
        &self.sides[2]
    }

    pub fn left(&self) -> &BoundaryCurve {
        &self.sides[3]
    }

    /// Counter-clockwise boundary samples.
    pub fn outline(&self) -> &[Point] {
        &self.outline
    }

    /// Corners BL, BR, TR, TL.
    pub fn corners(&self) -> [Point; 4] {
        std::array::from_fn(|k| self.sides[k].start())
    }

    pub fn top_y(&self, x: f64) -> Result<f64> {
        curve_eval(self.top(), x)
    }

    pub fn bottom_y(&self, x: f64) -> Result<f64> {
        curve_eval(self.bottom(), x)
    }

    /// Distances between opposite side midpoints: (left↔right, bottom↔top).
    pub fn width_height(&self) -> (f64, f64) {
        let m = |k: usize| self.sides[k].point(0.5);
        (m(3).dist(m(1)), m(0).dist(m(2)))
    }

    /// Long over short extent, at least 1.
    pub fn aspect(&self) -> f64 {
        let (w, h) = self.width_height();
        w.max(h) / w.min(h)
    }

    pub fn map(&self, t: &Similarity) -> Result<Self> {
        let sides = self.sides.map(|s| s.map(|p| t.apply(p)));
        Self::new(sides, self.provenance)
    }

    /// Same loop with every side label moved back by one, so the old right
    /// side becomes the bottom.
    pub fn relabel(&self) -> Result<Self> {
        Self::new(
            std::array::from_fn(|k| self.sides[(k + 1) % 4]),
            std::array::from_fn(|k| self.provenance[(k + 1) % 4]),
        )
    }

    pub fn original_sides(&self) -> usize {
        self.provenance
            .iter()
            .filter(|p| **p == Provenance::Original)
            .count()
    }

    pub fn original_length(&self) -> f64 {
        self.sides
            .iter()
            .zip(&self.provenance)
            .filter(|(_, p)| **p == Provenance::Original)
            .map(|(s, _)| curve_length(s))
            .sum()
    }
}

impl CutDomain for CurvilinearQuad {
    fn bottom_point(&self, q: f64) -> Result<Point> {
        let b = self.bottom();
        Ok(b.point(b.param_at_x(q)?))
    }

    fn top_point(&self, p: f64) -> Result<Point> {
        let t = self.top();
        Ok(t.point(t.param_at_x(p)?))
    }

    fn area_left_of_chord(&self, q: f64, p: f64) -> Result<f64> {
        let (b0, _) = self.bottom().split(self.bottom().param_at_x(q)?);
        let (_, t1) = self.top().split(self.top().param_at_x(p)?);
        let chord = BoundaryCurve::line(b0.end(), t1.start());
        Ok([b0, chord, t1, *self.left()]
            .iter()
            .map(BoundaryCurve::stokes)
            .sum())
    }

    fn total_area(&self) -> f64 {
        self.area
    }

    fn contains(&self, pt: Point, _tol: f64) -> bool {
        // even-odd rule on the sampled outline
        let n = self.outline.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.outline[i];
            let b = self.outline[(i + 1) % n];
            if (a.y > pt.y) != (b.y > pt.y) {
                let x = a.x + (pt.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if pt.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

/// `sup_t (|g′| + |g″| + |g‴|)` of a side written as a graph over its chord.
fn side_derivative_sup(c: &BoundaryCurve) -> Result<f64> {
    let not_graph = || Error::Geometry("side is not a graph over its chord".into());
    match *c {
        BoundaryCurve::Straight { .. } => Ok(0.0),
        BoundaryCurve::Parabolic { from, ctrl, to } => {
            let chord = to - from;
            let e = unit(chord);
            let n = e.perp();
            let dd = (from - ctrl * 2.0 + to) * 2.0;
            let (s_tt, n_tt) = (dd.dot(e), dd.dot(n));
            let mut sup: f64 = 0.0;
            for k in 0..=IQ_SAMPLES {
                let d = c.derivative(k as f64 / IQ_SAMPLES as f64);
                let (s_t, n_t) = (d.dot(e), d.dot(n));
                if !(s_t > 0.0) {
                    return Err(not_graph());
                }
                let num = n_tt * s_t - n_t * s_tt;
                let g1 = n_t / s_t;
                let g2 = num / s_t.powi(3);
                let g3 = -3.0 * s_tt * num / s_t.powi(5);
                sup = sup.max(g1.abs() + g2.abs() + g3.abs());
            }
            Ok(sup)
        }
        BoundaryCurve::Circular { from, to, theta } => {
            if theta.abs() >= PI {
                return Err(not_graph());
            }
            let r = from.dist(to) / (2.0 * (0.5 * theta.abs()).sin());
            let mut sup: f64 = 0.0;
            for k in 0..=IQ_SAMPLES {
                let phi = theta * (k as f64 / IQ_SAMPLES as f64 - 0.5);
                let (s, co) = (phi.sin().abs(), phi.cos().abs());
                sup = sup
                    .max(phi.tan().abs() + 1.0 / (r * co.powi(3)) + 3.0 * s / (r * r * co.powi(5)));
            }
            Ok(sup)
        }
    }
}

/// Rectangularity: corner deviations from a right angle plus the largest
/// derivative sup over the four sides.
pub fn iq_metric(q: &CurvilinearQuad) -> Result<f64> {
    let angles: f64 = q.angles.iter().map(|a| (a - FRAC_PI_2).abs()).sum();
    let mut sup: f64 = 0.0;
    for s in &q.sides {
        sup = sup.max(side_derivative_sup(s)?);
    }
    Ok(angles + sup)
}

/// Rotates the left/right sides to vertical, moves BL to the origin and
/// scales BR to x = 1, keeping the labels.
pub fn normalize_frame(q: &CurvilinearQuad) -> Result<(CurvilinearQuad, Similarity)> {
    let [bl, br, tr, tl] = q.corners();
    let d = unit(unit(tr - br) + unit(tl - bl));
    if !(d.x.is_finite() && d.y.is_finite()) {
        return Err(Error::Geometry(
            "left and right sides are antiparallel".into(),
        ));
    }
    let rot = Similarity {
        cos: d.y,
        sin: d.x,
        ..Similarity::IDENTITY
    };
    let (rbl, rbr) = (rot.apply(bl), rot.apply(br));
    let width = rbr.x - rbl.x;
    if !(width > 0.0) {
        return Err(Error::Geometry(
            "bottom side does not run left to right".into(),
        ));
    }
    let k = 1.0 / width;
    let t = Similarity {
        scale: k,
        tx: -k * rbl.x,
        ty: -k * rbl.y,
        ..rot
    };
    Ok((q.map(&t)?, t))
}

/// [`normalize_frame`] after relabeling so that the long direction is horizontal.
pub fn normalize(q: &CurvilinearQuad) -> Result<(CurvilinearQuad, Similarity)> {
    let (w, h) = q.width_height();
    if h > w * (1.0 + 1e-9) {
        normalize_frame(&q.relabel()?)
    } else {
        normalize_frame(q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedDomain {
    /// Absolute parameters; `a1` and `a2` include the height offset.
    pub sigma: DomainParams,
    /// `(a1 + a2) / 2`, the height beyond ½.
    pub height_offset: f64,
    /// Sup distance of top and bottom to the model over the central window.
    pub residual: f64,
}

impl FittedDomain {
    /// σ with the height offset removed from `a1` and `a2`.
    pub fn deviation(&self) -> DomainParams {
        let mut s = self.sigma;
        s.a1 -= self.height_offset;
        s.a2 -= self.height_offset;
        s
    }
}

/// Curvature of the parabola through a side's endpoints with the same cap.
fn side_curvature(c: &BoundaryCurve) -> Result<f64> {
    match *c {
        BoundaryCurve::Straight { .. } => Ok(0.0),
        BoundaryCurve::Circular { from, to, theta } => {
            let dx = to.x - from.x;
            let w = dx.abs();
            if !(w > 0.0) {
                return Err(Error::Geometry("vertical arc side".into()));
            }
            let dy = to.y - from.y;
            Ok(dx.signum() * (w * w + dy * dy) * theta / (2.0 * w.powi(3)))
        }
        BoundaryCurve::Parabolic { .. } => {
            let pts = c.sample(FIT_SAMPLES - 1);
            let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.y).collect();
            Ok(polyfit(&xs, &ys, 2)?[2])
        }
    }
}

/// Fits σ to a domain; the gate applies to [`FittedDomain::deviation`].
pub fn fit_sigma(q: &CurvilinearQuad, gate: f64, residual_limit: f64) -> Result<FittedDomain> {
    let (q, _) = normalize_frame(q)?;
    let [_, br, tr, tl] = q.corners();
    let mut sigma = DomainParams {
        a1: tl.y - 0.5,
        a2: tr.y - 0.5,
        a3: br.y,
        eps_t: side_curvature(q.top())?,
        eps_b: side_curvature(q.bottom())?,
        ..DomainParams::zero()
    };
    let model = TrapezoidDomain::unchecked(&sigma);
    let q_left = q.area_left_of_chord(0.5, 0.5)?;
    let m_left = model.area_left_of_chord(0.5, 0.5)?;
    sigma.wing_left = q_left - m_left;
    sigma.wing_right = (q.total_area() - q_left) - (model.total_area() - m_left);
    let (top, bottom) = (sigma.top(), sigma.bottom());
    let mut residual: f64 = 0.0;
    for k in 0..FIT_SAMPLES {
        let x = FIT_WINDOW.0 + (FIT_WINDOW.1 - FIT_WINDOW.0) * k as f64 / (FIT_SAMPLES - 1) as f64;
        residual = residual
            .max((q.top_y(x)? - top.eval(x)).abs())
            .max((q.bottom_y(x)? - bottom.eval(x)).abs());
    }
    let fitted = FittedDomain {
        sigma,
        height_offset: 0.5 * (sigma.a1 + sigma.a2),
        residual,
    };
    fitted.deviation().check_gate(gate)?;
    if !(residual <= residual_limit) {
        return Err(Error::OutOfRegime {
            param: "fit residual".into(),
            value: residual,
            gate: residual_limit,
        });
    }
    Ok(fitted)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsOptions {
    pub gate: f64,
    pub residual_limit: f64,
    /// Below this aspect ratio both orientations are cut.
    pub square_threshold: f64,
    /// Largest height offset for which the predictor seeds the optimizer.
    pub predictor_offset: f64,
    pub optimize: OptimizeOptions,
}

impl Default for DynamicsOptions {
    fn default() -> Self {
        Self {
            gate: DEFAULT_GATE,
            residual_limit: 0.02,
            square_threshold: 1.2,
            predictor_offset: 0.05,
            optimize: OptimizeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutOutcome {
    /// The cut domain, normalized; the cut lives in this frame.
    pub domain: CurvilinearQuad,
    /// Map from the input frame to the frame of `domain`.
    pub transform: Similarity,
    pub fitted: FittedDomain,
    pub report: OptimizeReport,
    pub left: CurvilinearQuad,
    pub right: CurvilinearQuad,
    /// The other orientation was chosen.
    pub rotated: bool,
    /// Both orientations gave the same value; the unrotated one is kept.
    pub branch_point: bool,
    /// Result of the orientation that was not chosen, when both were tried.
    pub alternative: Option<OptimizeReport>,
}

/// Sagitta over chord of an arc with opening `theta`.
pub fn relative_bulge(theta: f64) -> f64 {
    0.5 * (0.25 * theta.abs()).tan()
}

fn solve(q: &CurvilinearQuad, opts: &DynamicsOptions) -> Result<(FittedDomain, OptimizeReport)> {
    let fitted = fit_sigma(q, opts.gate, opts.residual_limit)?;
    let mut seeds = Vec::new();
    if fitted.height_offset.abs() <= opts.predictor_offset {
        if let Ok(c) = predict_cut_gated(&fitted.sigma, Order::Full, opts.gate) {
            seeds.push((c, SeedSource::Predictor));
        }
    }
    let report = minimize_cut(q, &seeds, &opts.optimize)?;
    Ok((fitted, report))
}

fn scale_free(r: &OptimizeReport) -> f64 {
    r.breakdown.value * r.breakdown.total_area().powf(1.5)
}

/// Splits a normalized domain along a cut from bottom to top.
pub fn split_domain(
    q: &CurvilinearQuad,
    cut: &CutParams,
) -> Result<(CurvilinearQuad, CurvilinearQuad)> {
    let (b0, b1) = q.bottom().split(q.bottom().param_at_x(cut.q)?);
    let (t0, t1) = q.top().split(q.top().param_at_x(cut.p)?);
    let arc = BoundaryCurve::arc(b0.end(), t0.end(), cut.theta);
    let [pb, pr, pt, pl] = q.provenance;
    let left = CurvilinearQuad::new([b0, arc, t1, *q.left()], [pb, Provenance::CutArc, pt, pl])?;
    let right = CurvilinearQuad::new(
        [b1, *q.right(), t0, arc.reversed()],
        [pb, pr, pt, Provenance::CutArc],
    )?;
    let gap = (left.area + right.area - q.area).abs();
    if gap > CLOSE_TOL {
        return Err(Error::Geometry(format!("children lose area {gap:.3e}")));
    }
    Ok((left, right))
}

/// Normalizes, fits and cuts a domain, returning both children.
pub fn cut_domain(q: &CurvilinearQuad, opts: &DynamicsOptions) -> Result<CutOutcome> {
    let (qn, tn) = normalize(q)?;
    let (fitted, report) = solve(&qn, opts)?;
    let mut chosen = (qn, tn, fitted, report);
    let (mut rotated, mut branch_point, mut alternative) = (false, false, None);
    if chosen.0.aspect() < opts.square_threshold {
        let (qa, ta) = normalize_frame(&chosen.0.relabel()?)?;
        if let Ok((fa, ra)) = solve(&qa, opts) {
            let (v0, v1) = (scale_free(&chosen.3), scale_free(&ra));
            if (v0 - v1).abs() <= 1e-9 * v0 {
                branch_point = true;
                alternative = Some(ra);
            } else if v1 < v0 {
                rotated = true;
                let previous = std::mem::replace(&mut chosen, (qa, tn.then(&ta), fa, ra));
                alternative = Some(previous.3);
            } else {
                alternative = Some(ra);
            }
        }
    }
    let (domain, transform, fitted, report) = chosen;
    let (left, right) = split_domain(&domain, &report.cut)?;
    Ok(CutOutcome {
        domain,
        transform,
        fitted,
        report,
        left,
        right,
        rotated,
        branch_point,
        alternative,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SidePolicy {
    Left,
    Right,
    Alternate,
    AwayFromOriginal,
}

impl std::str::FromStr for SidePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(SidePolicy::Left),
            "right" => Ok(SidePolicy::Right),
            "alternate" => Ok(SidePolicy::Alternate),
            "away-from-original" | "away" => Ok(SidePolicy::AwayFromOriginal),
            o => Err(Error::Invalid(format!("unknown side policy `{o}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

fn choose(
    policy: SidePolicy,
    step: usize,
    left: &CurvilinearQuad,
    right: &CurvilinearQuad,
) -> Side {
    match policy {
        SidePolicy::Left => Side::Left,
        SidePolicy::Right => Side::Right,
        SidePolicy::Alternate if step.is_multiple_of(2) => Side::Left,
        SidePolicy::Alternate => Side::Right,
        SidePolicy::AwayFromOriginal => {
            let key = |q: &CurvilinearQuad| (q.original_sides(), q.original_length());
            let (kl, kr) = (key(left), key(right));
            if kr.0 < kl.0 || (kr.0 == kl.0 && kr.1 < kl.1 - 1e-12) {
                Side::Right
            } else {
                Side::Left
            }
        }
    }
}

/// One line of the trajectory JSONL.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub sigma: [f64; 7],
    pub height_offset: f64,
    pub cut: CutParams,
    pub rc_value: f64,
    pub iq: f64,
    pub aspect: f64,
    pub theta: f64,
    /// Sagitta over chord of the cut arc.
    pub bulge: f64,
    pub side: Side,
    pub transform: Similarity,
    pub rotated: bool,
    pub branch_point: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StopReason {
    pub step: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    /// Normalized domain cut at each step.
    pub domains: Vec<CurvilinearQuad>,
    /// Domain passed to the next step, in the frame of the last record.
    pub last: CurvilinearQuad,
    pub stopped: Option<StopReason>,
}

impl Trajectory {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.theta).collect()
    }

    pub fn bulges(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.bulge).collect()
    }

    /// One panel per step: the normalized domain with its cut.
    pub fn filmstrip_svg(&self) -> String {
        let drawings: Vec<Drawing> = self
            .records
            .iter()
            .zip(&self.domains)
            .map(|(r, q)| {
                let arc = match (q.bottom_point(r.cut.q), q.top_point(r.cut.p)) {
                    (Ok(b), Ok(t)) => BoundaryCurve::arc(b, t, r.cut.theta).sample(64),
                    _ => Vec::new(),
                };
                Drawing {
                    outline: q.outline(),
                    curves: vec![(arc, "#d62728", None)],
                    caption: format!("step {}  θ={:.2e}", r.step, r.theta),
                }
            })
            .collect();
        filmstrip(&drawings)
    }
}

/// Runs `steps` cuts, stopping early when a step fails.
pub fn iterate(
    q0: &CurvilinearQuad,
    steps: usize,
    policy: SidePolicy,
    opts: &DynamicsOptions,
) -> Trajectory {
    let mut q = q0.clone();
    let mut records = Vec::new();
    let mut domains = Vec::new();
    let mut stopped = None;
    for step in 0..steps {
        let out = match cut_domain(&q, opts) {
            Ok(o) => o,
            Err(e) => {
                stopped = Some(StopReason {
                    step,
                    reason: e.to_string(),
                });
                break;
            }
        };
        let side = choose(policy, step, &out.left, &out.right);
        let theta = out.report.cut.theta;
        records.push(TrajectoryRecord {
            step,
            sigma: out.fitted.sigma.to_array(),
            height_offset: out.fitted.height_offset,
            cut: out.report.cut,
            rc_value: out.report.breakdown.value,
            iq: iq_metric(&out.domain).unwrap_or(f64::NAN),
            aspect: out.domain.aspect(),
            theta,
            bulge: relative_bulge(theta),
            side,
            transform: out.transform,
            rotated: out.rotated,
            branch_point: out.branch_point,
        });
        q = match side {
            Side::Left => out.left,
            Side::Right => out.right,
        };
        domains.push(out.domain);
    }
    Trajectory {
        records,
        domains,
        last: q,
        stopped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Param;
    use crate::ratiocut::{evaluate, ratio_cut};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rectangle_angles_and_iq() {
        let r = CurvilinearQuad::rectangle(1.0, 0.5).unwrap();
        for a in r.angles {
            assert!(close(a, FRAC_PI_2, 1e-15));
        }
        assert_eq!(iq_metric(&r).unwrap(), 0.0);
        assert!(close(r.area, 0.5, 1e-15));
        assert!(close(r.aspect(), 2.0, 1e-15));
    }

    #[test]
    fn trapezoid_iq_is_angle_sum() {
        let q = CurvilinearQuad::from_sigma(&DomainParams::zero().with(Param::A1, 0.1)).unwrap();
        let want = 2.0 * 0.1_f64.atan();
        assert!(close(iq_metric(&q).unwrap(), want, 1e-12));
    }

    #[test]
    fn circular_side_iq() {
        let (bl, br) = (Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        let (tr, tl) = (Point::new(1.0, 0.5), Point::new(0.0, 0.5));
        let q = CurvilinearQuad::new(
            [
                BoundaryCurve::line(bl, br),
                BoundaryCurve::line(br, tr),
                BoundaryCurve::arc(tr, tl, 0.1),
                BoundaryCurve::line(tl, bl),
            ],
            [Provenance::Original; 4],
        )
        .unwrap();
        assert!(iq_metric(&q).unwrap() >= 0.05_f64.tan());
        // an outward bulge opens the corner by half the arc angle
        assert!(close(q.angles[2], FRAC_PI_2 + 0.05, 1e-12));
    }

    #[test]
    fn stored_angles_match_one_sided_tangents() {
        let s = DomainParams::from_array([0.05, -0.03, 0.02, 0.1, -0.08, 0.01, 0.0]);
        let q = CurvilinearQuad::from_sigma(&s).unwrap();
        for k in 0..4 {
            let prev = &q.sides[(k + 3) % 4];
            let h = 1e-7;
            let incoming = prev.point(1.0) - prev.point(1.0 - h);
            let outgoing = q.sides[k].point(h) - q.sides[k].point(0.0);
            assert!(close(corner_angle(incoming, outgoing), q.angles[k], 1e-6));
        }
    }

    #[test]
    fn quad_matches_trapezoid_ratio_cut() {
        let s = DomainParams::from_array([0.05, -0.03, 0.02, 0.1, -0.08, 0.01, 0.02]);
        let q = CurvilinearQuad::from_sigma(&s).unwrap();
        let cut = CutParams::new(0.47, 0.52, 0.06);
        let a = evaluate(&q, &cut, true).unwrap();
        let b = ratio_cut(&s, &cut).unwrap();
        assert!(close(q.area, b.total_area(), 1e-13));
        assert!(close(a.value, b.value, 1e-11), "{} vs {}", a.value, b.value);
    }

    #[test]
    fn fit_round_trip() {
        let s = DomainParams::from_array([0.05, -0.03, 0.02, 0.1, -0.08, 0.01, 0.02]);
        let f = fit_sigma(
            &CurvilinearQuad::from_sigma(&s).unwrap(),
            DEFAULT_GATE,
            0.02,
        )
        .unwrap();
        for p in Param::ALL {
            assert!(close(f.sigma.get(p), s.get(p), 1e-12), "{p}");
        }
        assert!(f.residual <= 1e-12);
    }

    #[test]
    fn fit_circular_top_and_wing() {
        let (bl, br) = (Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        let (tr, tl) = (Point::new(1.0, 0.5), Point::new(0.0, 0.5));
        let q = CurvilinearQuad::new(
            [
                BoundaryCurve::line(bl, br),
                BoundaryCurve::line(br, tr),
                BoundaryCurve::arc(tr, tl, 0.1),
                BoundaryCurve::line(tl, bl),
            ],
            [Provenance::Original; 4],
        )
        .unwrap();
        let f = fit_sigma(&q, DEFAULT_GATE, 0.02).unwrap();
        assert!(close(f.sigma.eps_t, -0.05, 1e-15));

        let q = CurvilinearQuad::new(
            [
                BoundaryCurve::line(bl, br),
                BoundaryCurve::line(br, tr),
                BoundaryCurve::line(tr, tl),
                bulge(tl, bl, 0.01),
            ],
            [Provenance::Original; 4],
        )
        .unwrap();
        let f = fit_sigma(&q, DEFAULT_GATE, 0.02).unwrap();
        assert!(close(f.sigma.wing_left, 0.01, 1e-14));
        for p in Param::ALL.into_iter().filter(|p| *p != Param::WingLeft) {
            assert!(f.sigma.get(p).abs() < 1e-14, "{p}");
        }
    }

    #[test]
    fn normalize_examples() {
        let sq = CurvilinearQuad::polygon([
            Point::new(2.0, 3.0),
            Point::new(2.5, 3.0),
            Point::new(2.5, 3.5),
            Point::new(2.0, 3.5),
        ])
        .unwrap();
        let (n, t) = normalize(&sq).unwrap();
        assert!(close(t.scale, 2.0, 1e-15));
        for (c, w) in n
            .corners()
            .iter()
            .zip([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
        {
            assert!(close(c.x, w.0, 1e-14) && close(c.y, w.1, 1e-14));
        }
        let tall = CurvilinearQuad::rectangle(0.5, 1.0).unwrap();
        let (n, _) = normalize(&tall).unwrap();
        let [_, br, tr, _] = n.corners();
        assert!(close(br.x, 1.0, 1e-15) && close(tr.y, 0.5, 1e-15));
    }

    #[test]
    fn normalize_is_idempotent() {
        let s = DomainParams::from_array([0.05, -0.03, 0.02, 0.1, -0.08, 0.01, 0.02]);
        let q = CurvilinearQuad::from_sigma(&s).unwrap();
        let tilted = q
            .map(&Similarity {
                scale: 1.7,
                cos: 0.6,
                sin: 0.8,
                tx: 3.0,
                ty: -1.0,
            })
            .unwrap();
        let (a, _) = normalize(&tilted).unwrap();
        let (b, _) = normalize(&a).unwrap();
        for (x, y) in a.corners().iter().zip(b.corners()) {
            assert!(x.dist(y) < 1e-12);
        }
        for (x, y) in a.corners().iter().zip(q.corners()) {
            assert!(x.dist(y) < 1e-12);
        }
    }

    #[test]
    fn rectangle_cut_gives_squares() {
        let out = cut_domain(
            &CurvilinearQuad::rectangle(1.0, 0.5).unwrap(),
            &DynamicsOptions::default(),
        )
        .unwrap();
        assert_eq!(out.report.cut.theta, 0.0);
        assert!(close(out.report.cut.q, 0.5, 1e-9) && close(out.report.cut.p, 0.5, 1e-9));
        assert!(close(out.left.area, 0.25, 1e-12) && close(out.right.area, 0.25, 1e-12));
        assert!(close(out.left.aspect(), 1.0, 1e-9));
        assert_eq!(out.left.provenance[1], Provenance::CutArc);
        assert_eq!(out.right.provenance[3], Provenance::CutArc);
    }

    #[test]
    fn trapezoid_cut_bulge() {
        let q = CurvilinearQuad::from_sigma(&DomainParams::zero().with(Param::A1, 0.1)).unwrap();
        let out = cut_domain(&q, &DynamicsOptions::default()).unwrap();
        let theta = out.report.cut.theta;
        assert!((theta.abs() - 0.1).abs() < 0.03, "{theta}");
        assert!(relative_bulge(theta) < 0.1 / 8.0 * 1.3);
        let parts = out.left.area + out.right.area;
        assert!(close(parts, out.domain.area, 1e-9));
    }

    #[test]
    fn symmetric_domain_gives_congruent_children() {
        let s = DomainParams::from_array([0.04, 0.04, 0.0, -0.06, 0.05, 0.01, 0.01]);
        let out = cut_domain(
            &CurvilinearQuad::from_sigma(&s).unwrap(),
            &DynamicsOptions::default(),
        )
        .unwrap();
        assert!(close(out.left.area, out.right.area, 1e-8));
        assert!(close(out.report.cut.q + out.report.cut.p, 1.0, 1e-6));
        assert!(out.report.cut.theta.abs() < 1e-6);
    }

    #[test]
    fn rectangle_trajectory_alternates() {
        let t = iterate(
            &CurvilinearQuad::rectangle(1.0, 0.5).unwrap(),
            4,
            SidePolicy::AwayFromOriginal,
            &DynamicsOptions::default(),
        );
        assert!(t.stopped.is_none(), "{:?}", t.stopped);
        assert_eq!(t.records.len(), 4);
        for (k, r) in t.records.iter().enumerate() {
            assert_eq!(r.theta, 0.0);
            let want = if k % 2 == 0 { 2.0 } else { 1.0 };
            assert!(close(r.aspect, want, 1e-6), "step {k}: {}", r.aspect);
        }
        assert!(t.records[1].branch_point);
        assert_eq!(t.to_jsonl().lines().count(), 4);
    }

    #[test]
    fn triangle_stops_at_step_zero() {
        let t = iterate(
            &CurvilinearQuad::triangle().unwrap(),
            3,
            SidePolicy::Left,
            &DynamicsOptions::default(),
        );
        assert!(t.records.is_empty());
        assert_eq!(t.stopped.unwrap().step, 0);
    }

    #[test]
    fn similarity_composition() {
        let a = Similarity {
            scale: 2.0,
            cos: 0.6,
            sin: 0.8,
            tx: 1.0,
            ty: -2.0,
        };
        let b = Similarity {
            scale: 0.5,
            cos: 0.0,
            sin: 1.0,
            tx: 0.3,
            ty: 0.1,
        };
        let p = Point::new(0.7, -0.4);
        let direct = b.apply(a.apply(p));
        assert!(direct.dist(a.then(&b).apply(p)) < 1e-14);
    }
}
