//! The ratio cut functional `RC = length(Γ) / (A_L · A_R)` for circular-arc
//! cuts, its finite-difference derivatives and its minimizer.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    arc_length, cap_area, circle_through, ArcGeometry, BoundaryCurve, CutParams, DomainParams,
    Parabola, Point, DEFAULT_GATE,
};
use crate::numdiff::{gradient3, hessian3, GRAD_STEP, HESS_STEP};
use crate::perturbation::{predict_cut_gated, Order};

const INSIDE_SAMPLES: usize = 32;
const INSIDE_TOL: f64 = 1e-12;

/// A domain cut by arcs from its bottom curve to its top curve.
pub trait CutDomain {
    fn bottom_point(&self, q: f64) -> Result<Point>;
    fn top_point(&self, p: f64) -> Result<Point>;
    /// Area of the part left of the straight chord from `bottom(q)` to `top(p)`.
    fn area_left_of_chord(&self, q: f64, p: f64) -> Result<f64>;
    fn total_area(&self) -> f64;
    fn contains(&self, pt: Point, tol: f64) -> bool;
}

/// The parabolic trapezoid of a [`DomainParams`] with closed-form areas.
#[derive(Clone, Debug)]
pub struct TrapezoidDomain {
    pub sigma: DomainParams,
    top: Parabola,
    bottom: Parabola,
    total: f64,
}

impl TrapezoidDomain {
    pub fn new(sigma: &DomainParams, gate: f64) -> Result<Self> {
        sigma.check_gate(gate)?;
        Ok(Self::unchecked(sigma))
    }

    /// Skips the validity gate; used by finite-difference probes.
    pub fn unchecked(sigma: &DomainParams) -> Self {
        Self {
            sigma: *sigma,
            top: sigma.top(),
            bottom: sigma.bottom(),
            total: total_area_unchecked(sigma),
        }
    }
}

fn total_area_unchecked(s: &DomainParams) -> f64 {
    0.5 + 0.5 * (s.a1 + s.a2) - s.eps_t / 6.0 + s.eps_b / 6.0 - 0.5 * s.a3
        + s.wing_left
        + s.wing_right
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} outside [0, 1]")))
    }
}

impl CutDomain for TrapezoidDomain {
    fn bottom_point(&self, q: f64) -> Result<Point> {
        check_unit("q", q)?;
        Ok(Point::new(q, self.bottom.eval(q)))
    }

    fn top_point(&self, p: f64) -> Result<Point> {
        check_unit("p", p)?;
        Ok(Point::new(p, self.top.eval(p)))
    }

    fn area_left_of_chord(&self, q: f64, p: f64) -> Result<f64> {
        let b = self.bottom_point(q)?;
        let t = self.top_point(p)?;
        Ok(
            self.bottom.half_cross_integral(q) + 0.5 * b.cross(t) - self.top.half_cross_integral(p)
                + self.sigma.wing_left,
        )
    }

    fn total_area(&self) -> f64 {
        self.total
    }

    fn contains(&self, pt: Point, tol: f64) -> bool {
        (-tol..=1.0 + tol).contains(&pt.x)
            && pt.y >= self.bottom.eval(pt.x) - tol
            && pt.y <= self.top.eval(pt.x) + tol
    }
}

/// Which constant multiple of the ratio cut is reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `length / (A_L A_R)`, the convention of the expansion constants.
    #[default]
    Fixed,
    /// Multiplied by the total area `|Ω|`.
    AreaScaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCutBreakdown {
    pub cut_length: f64,
    pub chord: f64,
    pub area_left: f64,
    pub area_right: f64,
    pub value: f64,
    /// `None` for a straight cut.
    pub arc: Option<ArcGeometry>,
    pub endpoints: [Point; 2],
}

impl RatioCutBreakdown {
    pub fn total_area(&self) -> f64 {
        self.area_left + self.area_right
    }

    pub fn value_in(&self, norm: Normalization) -> f64 {
        match norm {
            Normalization::Fixed => self.value,
            Normalization::AreaScaled => self.value * self.total_area(),
        }
    }
}

/// Evaluates the cut on any [`CutDomain`]; `check_inside` samples the arc
/// against the domain and fails if it leaves.
pub fn evaluate<D: CutDomain + ?Sized>(
    dom: &D,
    cut: &CutParams,
    check_inside: bool,
) -> Result<RatioCutBreakdown> {
    let b = dom.bottom_point(cut.q)?;
    let t = dom.top_point(cut.p)?;
    let chord = b.dist(t);
    if !(chord > 0.0) {
        return Err(Error::Geometry("cut endpoints coincide".into()));
    }
    let area_left = dom.area_left_of_chord(cut.q, cut.p)? + cap_area(chord, cut.theta)?;
    let area_right = dom.total_area() - area_left;
    if !(area_left > 0.0 && area_right > 0.0) {
        return Err(Error::ZeroArea);
    }
    if check_inside {
        let arc = BoundaryCurve::arc(b, t, cut.theta);
        for k in 1..=INSIDE_SAMPLES {
            let pt = arc.point(k as f64 / (INSIDE_SAMPLES + 1) as f64);
            if !dom.contains(pt, INSIDE_TOL) {
                return Err(Error::Geometry(format!(
                    "arc leaves the domain near ({:.6}, {:.6})",
                    pt.x, pt.y
                )));
            }
        }
    }
    let cut_length = arc_length(chord, cut.theta);
    let arc = if cut.theta == 0.0 {
        None
    } else {
        Some(circle_through(b, t, cut.theta)?)
    };
    Ok(RatioCutBreakdown {
        cut_length,
        chord,
        area_left,
        area_right,
        value: cut_length / (area_left * area_right),
        arc,
        endpoints: [b, t],
    })
}

pub fn total_area(sigma: &DomainParams) -> Result<f64> {
    Ok(TrapezoidDomain::new(sigma, DEFAULT_GATE)?.total_area())
}

pub fn left_area(sigma: &DomainParams, cut: &CutParams) -> Result<f64> {
    Ok(ratio_cut(sigma, cut)?.area_left)
}

pub fn ratio_cut(sigma: &DomainParams, cut: &CutParams) -> Result<RatioCutBreakdown> {
    ratio_cut_gated(sigma, cut, DEFAULT_GATE)
}

pub fn ratio_cut_gated(
    sigma: &DomainParams,
    cut: &CutParams,
    gate: f64,
) -> Result<RatioCutBreakdown> {
    evaluate(&TrapezoidDomain::new(sigma, gate)?, cut, true)
}

/// Ratio cut value without gate or containment checks, for derivative probes.
pub fn ratio_cut_value_unchecked(sigma: &DomainParams, cut: &CutParams) -> Result<f64> {
    evaluate(&TrapezoidDomain::unchecked(sigma), cut, false).map(|b| b.value)
}

fn objective<D: CutDomain + ?Sized>(dom: &D) -> impl Fn([f64; 3]) -> Result<f64> + '_ {
    move |v| evaluate(dom, &CutParams::from_array(v), true).map(|b| b.value)
}

pub fn rc_gradient(sigma: &DomainParams, cut: &CutParams) -> Result<[f64; 3]> {
    let dom = TrapezoidDomain::new(sigma, DEFAULT_GATE)?;
    gradient3(objective(&dom), cut.to_array(), GRAD_STEP)
}

pub fn rc_hessian(sigma: &DomainParams, cut: &CutParams) -> Result<[[f64; 3]; 3]> {
    let dom = TrapezoidDomain::new(sigma, DEFAULT_GATE)?;
    hessian3(objective(&dom), cut.to_array(), HESS_STEP)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOptions {
    pub gate: f64,
    /// Gradient norm accepted as converged.
    pub tol: f64,
    /// Gradient norm accepted once Newton steps stall at round-off level.
    pub floor_tol: f64,
    pub max_iter: usize,
    /// Points per axis of the fallback grid.
    pub grid: usize,
    pub seed: Option<CutParams>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            gate: DEFAULT_GATE,
            tol: 1e-10,
            floor_tol: 1e-8,
            max_iter: 100,
            grid: 21,
            seed: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSource {
    Given,
    Predictor,
    Grid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub cut: CutParams,
    pub breakdown: RatioCutBreakdown,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub hessian_psd: bool,
    pub min_hessian_eigenvalue: f64,
    pub seed_source: SeedSource,
    /// True when convergence was declared at the finite-difference noise floor.
    pub at_noise_floor: bool,
}

fn norm3(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn newton<D: CutDomain + ?Sized>(
    dom: &D,
    seed: CutParams,
    source: SeedSource,
    opts: &OptimizeOptions,
) -> Result<OptimizeReport> {
    let obj = objective(dom);
    let mut x = seed.to_array();
    let mut fx = obj(x)?;
    let mut g = gradient3(&obj, x, GRAD_STEP)?;
    let mut mu = 0.0_f64;
    let mut iterations = 0;
    let mut at_floor = false;
    while norm3(&g) > opts.tol {
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;
        let h = hessian3(&obj, x, HESS_STEP)?;
        let hm = Matrix3::from_fn(|i, j| h[i][j]);
        let scale = 1.0 + hm.norm();
        let gv = Vector3::new(g[0], g[1], g[2]);
        // gradient noise alone: the predicted decrease is below rounding of f
        if norm3(&g) <= opts.floor_tol {
            if let Some(ch) = hm.cholesky() {
                let decrement = 0.5 * gv.dot(&ch.solve(&gv));
                if decrement <= 4.0 * f64::EPSILON * fx.abs() {
                    at_floor = true;
                    break;
                }
            }
        }
        let mut step = None;
        for _ in 0..60 {
            let damped = hm + Matrix3::identity() * mu;
            let Some(ch) = damped.cholesky() else {
                mu = if mu == 0.0 { 1e-8 * scale } else { mu * 10.0 };
                continue;
            };
            let d = ch.solve(&(-gv));
            let xn = [x[0] + d[0], x[1] + d[1], x[2] + d[2]];
            match obj(xn) {
                Ok(fnew) if fnew <= fx + 4.0 * f64::EPSILON * fx.abs() => {
                    step = Some((xn, fnew, d.norm()));
                    break;
                }
                _ => mu = if mu == 0.0 { 1e-8 * scale } else { mu * 10.0 },
            }
        }
        let Some((xn, fnew, dn)) = step else {
            at_floor = norm3(&g) <= opts.floor_tol;
            break;
        };
        x = xn;
        fx = fnew;
        mu = if mu < 1e-6 * scale { 0.0 } else { mu * 0.1 };
        g = gradient3(&obj, x, GRAD_STEP)?;
        if dn <= 1e-12 && norm3(&g) <= opts.floor_tol {
            at_floor = norm3(&g) > opts.tol;
            break;
        }
    }
    let gn = norm3(&g);
    if gn > opts.tol && !(at_floor && gn <= opts.floor_tol) {
        return Err(Error::NoConvergence(format!(
            "gradient norm {gn:.3e} after {iterations} iterations"
        )));
    }
    let h = hessian3(&obj, x, HESS_STEP)?;
    let eig = SymmetricEigen::new(Matrix3::from_fn(|i, j| h[i][j]));
    let min_eig = eig.eigenvalues.min();
    if !(min_eig > 0.0) {
        return Err(Error::Saddle(min_eig));
    }
    let cut = CutParams::from_array(x);
    Ok(OptimizeReport {
        cut,
        breakdown: evaluate(dom, &cut, true)?,
        iterations,
        gradient_norm: gn,
        hessian_psd: true,
        min_hessian_eigenvalue: min_eig,
        seed_source: source,
        at_noise_floor: gn > opts.tol,
    })
}

/// Ranges of the exhaustive cut search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub q: (f64, f64),
    pub p: (f64, f64),
    pub theta: (f64, f64),
}

impl GridSpec {
    pub fn new(points: usize) -> Self {
        Self {
            points,
            q: (0.3, 0.7),
            p: (0.3, 0.7),
            theta: (-0.5, 0.5),
        }
    }

    fn coord(range: (f64, f64), n: usize, k: usize) -> f64 {
        // Symmetric about the center so that ½ and 0 are hit exactly.
        let mid = 0.5 * (range.0 + range.1);
        let step = (range.1 - range.0) / (n - 1) as f64;
        mid + (k as f64 - 0.5 * (n - 1) as f64) * step
    }

    pub fn cut(&self, idx: usize) -> CutParams {
        let n = self.points;
        CutParams::new(
            Self::coord(self.q, n, idx / (n * n)),
            Self::coord(self.p, n, (idx / n) % n),
            Self::coord(self.theta, n, idx % n),
        )
    }

    pub fn cell(&self) -> [f64; 3] {
        let n = (self.points - 1) as f64;
        [
            (self.q.1 - self.q.0) / n,
            (self.p.1 - self.p.0) / n,
            (self.theta.1 - self.theta.0) / n,
        ]
    }
}

/// Grid point with the smallest ratio cut; ties go to the lowest index.
pub fn grid_minimum<D: CutDomain + Sync + ?Sized>(
    dom: &D,
    grid: &GridSpec,
) -> Option<(CutParams, f64)> {
    let n = grid.points;
    (0..n * n * n)
        .into_par_iter()
        .filter_map(|idx| {
            let cut = grid.cut(idx);
            evaluate(dom, &cut, true).ok().map(|b| (idx, b.value))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(idx, v)| (grid.cut(idx), v))
}

pub fn brute_force_cut(sigma: &DomainParams, grid: &GridSpec) -> Result<CutParams> {
    if grid.points < 11 {
        return Err(Error::Invalid(
            "grid needs at least 11 points per axis".into(),
        ));
    }
    let dom = TrapezoidDomain::unchecked(sigma);
    grid_minimum(&dom, grid)
        .map(|(c, _)| c)
        .ok_or_else(|| Error::Geometry("no admissible cut on the grid".into()))
}

/// Minimizes over a general domain from the given seeds, falling back to the grid.
pub fn minimize_cut<D: CutDomain + Sync + ?Sized>(
    dom: &D,
    seeds: &[(CutParams, SeedSource)],
    opts: &OptimizeOptions,
) -> Result<OptimizeReport> {
    let mut last = None;
    for (seed, src) in seeds {
        match newton(dom, *seed, *src, opts) {
            Ok(r) => return Ok(r),
            Err(e) => last = Some(e),
        }
    }
    let grid = GridSpec::new(opts.grid.max(3));
    match grid_minimum(dom, &grid) {
        Some((seed, _)) => newton(dom, seed, SeedSource::Grid, opts),
        None => Err(last.unwrap_or_else(|| Error::Geometry("no admissible cut".into()))),
    }
}

pub fn optimize_cut(sigma: &DomainParams, opts: &OptimizeOptions) -> Result<OptimizeReport> {
    let dom = TrapezoidDomain::new(sigma, opts.gate)?;
    let mut seeds = Vec::new();
    if let Some(s) = opts.seed {
        seeds.push((s, SeedSource::Given));
    }
    if let Ok(c) = predict_cut_gated(sigma, Order::Full, opts.gate)
        .or_else(|_| predict_cut_gated(sigma, Order::First, opts.gate))
    {
        seeds.push((c, SeedSource::Predictor));
    }
    minimize_cut(&dom, &seeds, opts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "orientation", rename_all = "lowercase")]
pub enum RectangleCutLine {
    Vertical { x: f64 },
    Horizontal { y: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleCut {
    /// Area-scaled ratio cut, `4 / max(a, b)`.
    pub value: f64,
    pub cut: RectangleCutLine,
    /// Both midlines are optimal.
    pub degenerate: bool,
}

/// Optimal cut of the `a × b` rectangle: the midline across the long side.
pub fn rectangle_ratio_cut(a: f64, b: f64) -> Result<RectangleCut> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain("rectangle sides must be positive".into()));
    }
    let cut = if a >= b {
        RectangleCutLine::Vertical { x: 0.5 * a }
    } else {
        RectangleCutLine::Horizontal { y: 0.5 * b }
    };
    Ok(RectangleCut {
        value: 4.0 / a.max(b),
        cut,
        degenerate: a == b,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SidePair {
    SameSide,
    Adjacent,
    OppositeLong,
    OppositeShort,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectangleSearch {
    pub best_value: f64,
    pub best_endpoints: [Point; 2],
    pub best_theta: f64,
    pub best_pair: SidePair,
    /// Smallest value per [`SidePair`], in declaration order.
    pub category_minimum: [f64; 4],
    pub boundary_spacing: f64,
    pub evaluated: usize,
}

/// Exhaustive search over straight and circular cuts of the `a × b`
/// rectangle with endpoints on an even perimeter grid.
pub fn rectangle_cut_search(
    a: f64,
    b: f64,
    boundary_points: usize,
    theta_points: usize,
    theta_max: f64,
) -> Result<RectangleSearch> {
    if !(a > 0.0 && b > 0.0) || boundary_points < 4 || theta_points < 1 {
        return Err(Error::Invalid("bad rectangle search parameters".into()));
    }
    let perim = 2.0 * (a + b);
    let ds = perim / boundary_points as f64;
    let corners = [0.0, a, a + b, 2.0 * a + b];
    let at = |s: f64| -> (Point, usize) {
        if s < a {
            (Point::new(s, 0.0), 0)
        } else if s < a + b {
            (Point::new(a, s - a), 1)
        } else if s < 2.0 * a + b {
            (Point::new(a - (s - a - b), b), 2)
        } else {
            (Point::new(0.0, b - (s - 2.0 * a - b)), 3)
        }
    };
    let pts: Vec<(f64, Point, usize)> = (0..boundary_points)
        .map(|k| {
            let s = k as f64 * ds;
            let (p, side) = at(s);
            (s, p, side)
        })
        .collect();
    let thetas: Vec<f64> = (0..theta_points)
        .map(|k| {
            if theta_points == 1 {
                0.0
            } else {
                theta_max * (2.0 * k as f64 / (theta_points - 1) as f64 - 1.0)
            }
        })
        .collect();
    let total = a * b;
    let long_vertical = b > a;
    let classify = |s1: usize, s2: usize| -> SidePair {
        if s1 == s2 {
            SidePair::SameSide
        } else if (s1 + 2) % 4 == s2 {
            let horizontal_pair = s1.is_multiple_of(2);
            if horizontal_pair != long_vertical {
                SidePair::OppositeLong
            } else {
                SidePair::OppositeShort
            }
        } else {
            SidePair::Adjacent
        }
    };
    type Best = (f64, usize, usize, f64);
    let results: Vec<([Option<Best>; 4], usize)> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut best: [Option<Best>; 4] = [None; 4];
            let mut count = 0;
            let (s1, p1, side1) = pts[i];
            for (j, &(s2, p2, side2)) in pts.iter().enumerate().skip(i + 1) {
                // Boundary walk from s1 to s2 with the corners in between.
                let mut poly = vec![p1];
                poly.extend(
                    corners
                        .iter()
                        .filter(|&&c| c > s1 && c < s2)
                        .map(|&c| at(c).0),
                );
                poly.push(p2);
                let shoelace: f64 = 0.5
                    * (0..poly.len())
                        .map(|k| poly[k].cross(poly[(k + 1) % poly.len()]))
                        .sum::<f64>();
                let chord = p1.dist(p2);
                let cat = classify(side1, side2) as usize;
                for &theta in &thetas {
                    let Ok(cap) = cap_area(chord, theta) else {
                        continue;
                    };
                    let area = shoelace + cap;
                    if !(area > 1e-12 && area < total - 1e-12) {
                        continue;
                    }
                    let arc = BoundaryCurve::arc(p2, p1, theta);
                    let inside = (1..=INSIDE_SAMPLES).all(|k| {
                        let q = arc.point(k as f64 / (INSIDE_SAMPLES + 1) as f64);
                        q.x >= -1e-9 && q.x <= a + 1e-9 && q.y >= -1e-9 && q.y <= b + 1e-9
                    });
                    if !inside {
                        continue;
                    }
                    count += 1;
                    let v = arc_length(chord, theta) * total / (area * (total - area));
                    if best[cat].is_none_or(|bb| v < bb.0) {
                        best[cat] = Some((v, i, j, theta));
                    }
                }
            }
            (best, count)
        })
        .collect();
    let mut cat_best: [Option<Best>; 4] = [None; 4];
    let mut evaluated = 0;
    for (best, count) in results {
        evaluated += count;
        for c in 0..4 {
            if let Some(b) = best[c] {
                if cat_best[c].is_none_or(|cb| b.0 < cb.0) {
                    cat_best[c] = Some(b);
                }
            }
        }
    }
    let pairs = [
        SidePair::SameSide,
        SidePair::Adjacent,
        SidePair::OppositeLong,
        SidePair::OppositeShort,
    ];
    let (ci, overall) = cat_best
        .iter()
        .enumerate()
        .filter_map(|(c, b)| b.map(|b| (c, b)))
        .min_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
        .ok_or_else(|| Error::Geometry("no admissible cut".into()))?;
    Ok(RectangleSearch {
        best_value: overall.0,
        best_endpoints: [pts[overall.1].1, pts[overall.2].1],
        best_theta: overall.3,
        best_pair: pairs[ci],
        category_minimum: cat_best.map(|b| b.map_or(f64::INFINITY, |b| b.0)),
        boundary_spacing: ds,
        evaluated,
    })
}

/// `(1+ε₀)/√6 · chord^{3/2} · √excess` for a perimeter excess in the
/// small regime `excess ≤ 2 ε₁ chord`.
pub fn lemma2_area_bound(chord: f64, perimeter_excess: f64, eps0: f64, eps1: f64) -> Result<f64> {
    if !(chord > 0.0) || perimeter_excess < 0.0 || perimeter_excess > 2.0 * eps1 * chord {
        return Err(Error::Domain(format!(
            "perimeter excess {perimeter_excess} outside [0, {}]",
            2.0 * eps1 * chord
        )));
    }
    Ok((1.0 + eps0) / 6f64.sqrt() * chord.powf(1.5) * perimeter_excess.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Check {
    pub chord: f64,
    pub theta: f64,
    pub excess: f64,
    pub cap: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compares the cap of a circular arc with the bound for its length excess.
pub fn lemma2_check(chord: f64, theta: f64, eps0: f64, eps1: f64) -> Result<Lemma2Check> {
    let excess = arc_length(chord, theta) - chord;
    let bound = lemma2_area_bound(chord, excess, eps0, eps1)?;
    let cap = cap_area(chord, theta)?.abs();
    Ok(Lemma2Check {
        chord,
        theta,
        excess,
        cap,
        bound,
        holds: cap <= bound,
    })
}
