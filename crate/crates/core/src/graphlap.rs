//! Graph p-Laplacian bipartition of sampled point clouds.
//!
//! The second 1-eigenvector is approximated with the nonlinear inverse
//! power method: each outer step minimizes the total variation minus
//! `λ⟨g, v⟩` on the unit ball, with the inner problem solved by FISTA on its
//! box-constrained dual.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::CurvilinearQuad;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::ratiocut::CutDomain;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point>,
    pub seed: u64,
}

const MIN_ACCEPTANCE: f64 = 0.01;

/// Uniform rejection sampling of `n` points from the bounding box of `q`.
pub fn sample_domain(q: &CurvilinearQuad, n: usize, seed: u64) -> Result<PointCloud> {
    if n < 100 {
        return Err(Error::Invalid(format!("need at least 100 points, got {n}")));
    }
    let pts: Vec<Point> = q.sides.iter().flat_map(|s| s.sample(64)).collect();
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if !(hi.x > lo.x && hi.y > lo.y && q.area > 0.0) {
        return Err(Error::Domain("degenerate domain".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut trials = 0usize;
    while points.len() < n {
        trials += 1;
        let p = Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y));
        if q.contains(p, 0.0) {
            points.push(p);
        }
        if trials >= 1000 && (points.len() as f64) < MIN_ACCEPTANCE * trials as f64 {
            return Err(Error::Domain(format!(
                "acceptance rate {:.4} below {MIN_ACCEPTANCE}",
                points.len() as f64 / trials as f64
            )));
        }
    }
    Ok(PointCloud { points, seed })
}

/// Symmetric weighted graph stored as an edge list and in CSR form.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityGraph {
    n: usize,
    /// Each undirected edge once, `i < j`.
    edges: Vec<(usize, usize, f64)>,
    offsets: Vec<usize>,
    neighbors: Vec<(usize, f64)>,
    pub bandwidth: Option<f64>,
}

fn median_of(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

impl AffinityGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut list: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len());
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::Dimension {
                    expected: n,
                    found: i.max(j) + 1,
                });
            }
            if i == j || !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Invalid(format!("bad edge ({i}, {j}, {w})")));
            }
            list.push((i.min(j), i.max(j), w));
        }
        list.sort_by_key(|e| (e.0, e.1));
        list.dedup_by(|b, a| a.0 == b.0 && a.1 == b.1);
        list.retain(|e| e.2 > 0.0);
        let mut deg = vec![0usize; n];
        for &(i, j, _) in &list {
            deg[i] += 1;
            deg[j] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![(0usize, 0.0); offsets[n]];
        for &(i, j, w) in &list {
            neighbors[fill[i]] = (j, w);
            fill[i] += 1;
            neighbors[fill[j]] = (i, w);
            fill[j] += 1;
        }
        Ok(Self {
            n,
            edges: list,
            offsets,
            neighbors,
            bandwidth: None,
        })
    }

    /// Gaussian weights `exp(−d²/h²)` on the symmetrized k-nearest-neighbour
    /// graph; `h` defaults to the median k-th neighbour distance.
    pub fn knn_gaussian(points: &[Point], k: usize, bandwidth: Option<f64>) -> Result<Self> {
        let n = points.len();
        if k == 0 || k >= n {
            return Err(Error::Invalid(format!("k = {k} must lie in 1..{n}")));
        }
        let lists: Vec<Vec<(usize, f64)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut d: Vec<(usize, f64)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (j, points[i].dist(points[j])))
                    .collect();
                d.select_nth_unstable_by(k - 1, |a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                d.truncate(k);
                d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                d
            })
            .collect();
        let h = match bandwidth {
            Some(h) => h,
            None => median_of(&mut lists.iter().map(|l| l[k - 1].1).collect::<Vec<_>>()),
        };
        if !(h > 0.0) {
            return Err(Error::Invalid(format!("bandwidth {h} must be positive")));
        }
        let edges: Vec<(usize, usize, f64)> = lists
            .iter()
            .enumerate()
            .flat_map(|(i, l)| {
                l.iter()
                    .map(move |&(j, d)| (i, j, (-(d * d) / (h * h)).exp()))
            })
            .collect();
        let mut g = Self::from_edges(n, &edges)?;
        g.bandwidth = Some(h);
        Ok(g)
    }

    /// Gaussian weights on all pairs closer than `radius`; `h` defaults to the radius.
    pub fn radius(points: &[Point], radius: f64, bandwidth: Option<f64>) -> Result<Self> {
        let h = bandwidth.unwrap_or(radius);
        if !(radius > 0.0 && h > 0.0) {
            return Err(Error::Invalid(
                "radius and bandwidth must be positive".into(),
            ));
        }
        let n = points.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = points[i].dist(points[j]);
                if d <= radius {
                    edges.push((i, j, (-(d * d) / (h * h)).exp()));
                }
            }
        }
        let mut g = Self::from_edges(n, &edges)?;
        g.bandwidth = Some(h);
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.neighbors(i)
            .iter()
            .find(|(k, _)| *k == j)
            .map_or(0.0, |(_, w)| *w)
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.neighbors(i).iter().map(|(_, w)| w).sum()
    }

    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(i) = stack.pop() {
                for &(j, _) in self.neighbors(i) {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        count
    }

    pub fn check_connected(&self) -> Result<()> {
        match self.components() {
            1 => Ok(()),
            c => Err(Error::Disconnected(c)),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,w\n");
        for (i, j, w) in &self.edges {
            s.push_str(&format!("{i},{j},{w:.17e}\n"));
        }
        s
    }

    fn laplacian_apply(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.neighbors(i)
                    .iter()
                    .map(|&(j, w)| w * (f[i] - f[j]))
                    .sum()
            })
            .collect()
    }
}

fn check_len(g: &AffinityGraph, f: &[f64]) -> Result<()> {
    if f.len() != g.len() {
        return Err(Error::Dimension {
            expected: g.len(),
            found: f.len(),
        });
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) {
        return Err(Error::Invalid(format!("p = {p} must be at least 1")));
    }
    Ok(())
}

/// `sign(x)|x|^{p−1}` with `sign(0) = 0`.
fn phi(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if p == 1.0 {
        x.signum()
    } else {
        x.signum() * x.abs().powf(p - 1.0)
    }
}

/// `(Δ_p f)_i = Σ_j w_ij φ_p(f_i − f_j)`.
pub fn graph_p_laplacian_apply(g: &AffinityGraph, f: &[f64], p: f64) -> Result<Vec<f64>> {
    check_len(g, f)?;
    check_p(p)?;
    Ok((0..g.len())
        .map(|i| {
            g.neighbors(i)
                .iter()
                .map(|&(j, w)| w * phi(f[i] - f[j], p))
                .sum()
        })
        .collect())
}

/// `⟨f, Δ_p f⟩ = ½ Σ_ij w_ij |f_i − f_j|^p`.
pub fn energy(g: &AffinityGraph, f: &[f64], p: f64) -> Result<f64> {
    check_len(g, f)?;
    check_p(p)?;
    Ok(g.edges
        .iter()
        .map(|&(i, j, w)| w * (f[i] - f[j]).abs().powf(p))
        .sum())
}

/// Lowest median.
pub fn median(f: &[f64]) -> f64 {
    median_of(&mut f.to_vec())
}

/// `min_c Σ |f_i − c|^p`.
pub fn var_p(f: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if f.is_empty() {
        return Err(Error::Invalid("empty vector".into()));
    }
    let cost = |c: f64| f.iter().map(|x| (x - c).abs().powf(p)).sum::<f64>();
    if p == 1.0 {
        return Ok(cost(median(f)));
    }
    if p == 2.0 {
        let m = f.iter().sum::<f64>() / f.len() as f64;
        return Ok(f.iter().map(|x| (x - m) * (x - m)).sum());
    }
    // convex in c: golden-section search on [min, max]
    let (mut a, mut b) = f
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c1 = b - r * (b - a);
        let c2 = a + r * (b - a);
        if cost(c1) <= cost(c2) {
            b = c2;
        } else {
            a = c1;
        }
    }
    Ok(cost(0.5 * (a + b)))
}

/// `F_p = ⟨f, Δ_p f⟩ / var_p(f)`.
pub fn functional_f2(g: &AffinityGraph, f: &[f64], p: f64) -> Result<f64> {
    let v = var_p(f, p)?;
    if v <= 0.0 {
        return Err(Error::TrivialEigenvector);
    }
    Ok(energy(g, f, p)? / v)
}

/// `cut(S) / min(|S|, |S^c|)`, which is `F_1` of the indicator of `S`.
pub fn ratio_cheeger_cut(g: &AffinityGraph, in_s: &[bool]) -> Result<f64> {
    if in_s.len() != g.len() {
        return Err(Error::Dimension {
            expected: g.len(),
            found: in_s.len(),
        });
    }
    let k = in_s.iter().filter(|b| **b).count();
    let small = k.min(g.len() - k);
    if small == 0 {
        return Err(Error::NoCut);
    }
    let cut: f64 = g
        .edges
        .iter()
        .filter(|(i, j, _)| in_s[*i] != in_s[*j])
        .map(|e| e.2)
        .sum();
    Ok(cut / small as f64)
}

/// Exhaustive minimum of the ratio Cheeger cut for `n ≤ 24`.
pub fn brute_force_bipartition(g: &AffinityGraph) -> Result<(Vec<bool>, f64)> {
    let n = g.len();
    if !(2..=24).contains(&n) {
        return Err(Error::Invalid(format!(
            "brute force needs 2 ≤ n ≤ 24, got {n}"
        )));
    }
    // the last vertex is always outside S
    let best = (1u32..(1u32 << (n - 1)))
        .into_par_iter()
        .map(|mask| {
            let s: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            (mask, ratio_cheeger_cut(g, &s).unwrap_or(f64::INFINITY))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(Error::NoCut)?;
    Ok(((0..n).map(|i| best.0 >> i & 1 == 1).collect(), best.1))
}

/// Splits by sign; zeros join the smaller strict-sign side.
pub fn bipartition(f: &[f64]) -> Result<(Vec<usize>, Vec<usize>)> {
    let pos: Vec<usize> = (0..f.len()).filter(|&i| f[i] > 0.0).collect();
    let neg: Vec<usize> = (0..f.len()).filter(|&i| f[i] < 0.0).collect();
    let zero: Vec<usize> = (0..f.len()).filter(|&i| f[i] == 0.0).collect();
    if (pos.is_empty() || neg.is_empty()) && zero.is_empty() {
        return Err(Error::NoCut);
    }
    let (mut pos, mut neg) = (pos, neg);
    if pos.len() <= neg.len() {
        pos.extend(zero);
        pos.sort_unstable();
    } else {
        neg.extend(zero);
        neg.sort_unstable();
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::NoCut);
    }
    Ok((pos, neg))
}

/// Second eigenvector of `D − W`.
pub fn fiedler_vector(g: &AffinityGraph, seed: u64) -> Result<Vec<f64>> {
    g.check_connected()?;
    let n = g.len();
    if n <= 400 {
        let mut l = DMatrix::<f64>::zeros(n, n);
        for &(i, j, w) in &g.edges {
            l[(i, j)] -= w;
            l[(j, i)] -= w;
            l[(i, i)] += w;
            l[(j, j)] += w;
        }
        let eig = SymmetricEigen::new(l);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
        return Ok(eig.eigenvectors.column(order[1]).iter().copied().collect());
    }
    // inverse iteration on the complement of the constants
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    for _ in 0..60 {
        center_mean(&mut x);
        normalize2(&mut x);
        x = conjugate_gradient(g, &x, 1e-10, 2000);
    }
    center_mean(&mut x);
    normalize2(&mut x);
    Ok(x)
}

fn center_mean(x: &mut [f64]) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= m);
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize2(x: &mut [f64]) {
    let n = norm2(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

/// Solves `(D − W) x = b` for `b ⊥ 1`.
fn conjugate_gradient(g: &AffinityGraph, b: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut d = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let stop = tol * tol * rr;
    for _ in 0..max_iter {
        if rr <= stop {
            break;
        }
        let ad = g.laplacian_apply(&d);
        let alpha = rr / d.iter().zip(&ad).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * d[i];
            r[i] -= alpha * ad[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rr_new / rr;
        for i in 0..n {
            d[i] = r[i] + beta * d[i];
        }
        rr = rr_new;
    }
    x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpmOptions {
    pub starts: usize,
    pub max_outer: usize,
    /// Stop once the relative decrease of F drops below this.
    pub rel_tol: f64,
    pub max_inner: usize,
    pub inner_tol: f64,
    pub seed: u64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            max_outer: 500,
            rel_tol: 1e-6,
            max_inner: 2000,
            inner_tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    /// Median-centered, unit-norm vertex function.
    pub f: Vec<f64>,
    /// `F_1(f)`.
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// F after every accepted outer step, starting with the initial value.
    pub history: Vec<f64>,
    /// Which start produced the result; 0 is the thresholded Fiedler vector.
    pub start: usize,
}

impl EigenResult {
    pub fn monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[1] <= w[0])
    }
}

fn centered_unit(mut f: Vec<f64>) -> Vec<f64> {
    let m = median(&f);
    f.iter_mut().for_each(|v| *v -= m);
    normalize2(&mut f);
    f
}

/// Best level set `{f > t}` by ratio Cheeger cut, as an indicator vector.
fn optimal_threshold(g: &AffinityGraph, f: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = f.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| f[*b].total_cmp(&f[*a]).then(a.cmp(b)));
    let mut in_s = vec![false; n];
    let mut cut = 0.0;
    let mut best: Option<(usize, f64)> = None;
    for (k, &v) in order.iter().enumerate().take(n - 1) {
        for &(u, w) in g.neighbors(v) {
            cut += if in_s[u] { -w } else { w };
        }
        in_s[v] = true;
        // only split between distinct values
        if f[order[k + 1]] == f[v] {
            continue;
        }
        let size = k + 1;
        let value = cut / size.min(n - size) as f64;
        if best.is_none_or(|(_, b)| value < b) {
            best = Some((size, value));
        }
    }
    let (size, value) = best?;
    let mut ind = vec![0.0; n];
    for &v in &order[..size] {
        ind[v] = 1.0;
    }
    Some((ind, value))
}

/// Subgradient of `‖f − median‖₁` with zero entries balanced to sum zero.
fn var1_subgradient(f: &[f64]) -> Vec<f64> {
    let pos = f.iter().filter(|v| **v > 0.0).count() as f64;
    let neg = f.iter().filter(|v| **v < 0.0).count() as f64;
    let zero = f.len() as f64 - pos - neg;
    let c = if zero > 0.0 {
        ((neg - pos) / zero).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    f.iter()
        .map(|&v| {
            if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                c
            }
        })
        .collect()
}

/// `argmin_{‖g‖≤1} Σ_e w_e|g_i − g_j| − λ⟨g, v⟩` through FISTA on the dual
/// variable `α ∈ [−1, 1]^E`, warm-started from `alpha`.
fn inner_step(
    g: &AffinityGraph,
    lambda: f64,
    v: &[f64],
    alpha: &mut [f64],
    opts: &IpmOptions,
) -> Vec<f64> {
    let n = g.len();
    let max_deg = (0..n).map(|i| g.neighbors(i).len()).max().unwrap_or(0) as f64;
    let max_w = g.edges.iter().map(|e| e.2).fold(0.0, f64::max);
    let lip = (2.0 * max_deg * max_w * max_w).max(f64::MIN_POSITIVE);
    let apply = |a: &[f64]| {
        let mut r: Vec<f64> = v.iter().map(|x| -lambda * x).collect();
        for (e, &(i, j, w)) in g.edges.iter().enumerate() {
            r[i] += w * a[e];
            r[j] -= w * a[e];
        }
        r
    };
    let mut y = alpha.to_vec();
    let mut t = 1.0_f64;
    for _ in 0..opts.max_inner {
        let r = apply(&y);
        let mut change: f64 = 0.0;
        let mut next = vec![0.0; alpha.len()];
        for (e, &(i, j, w)) in g.edges.iter().enumerate() {
            next[e] = (y[e] - w * (r[i] - r[j]) / lip).clamp(-1.0, 1.0);
            change = change.max((next[e] - alpha[e]).abs());
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let mom = (t - 1.0) / t_next;
        for e in 0..alpha.len() {
            y[e] = next[e] + mom * (next[e] - alpha[e]);
        }
        alpha.copy_from_slice(&next);
        t = t_next;
        if change <= opts.inner_tol {
            break;
        }
    }
    apply(alpha).iter().map(|x| -x).collect()
}

fn ipm_single(
    g: &AffinityGraph,
    f0: Vec<f64>,
    start: usize,
    opts: &IpmOptions,
) -> Result<EigenResult> {
    let mut f = centered_unit(f0);
    let mut lambda = functional_f2(g, &f, 1.0)?;
    if let Some((ind, value)) = optimal_threshold(g, &f) {
        if value < lambda {
            f = centered_unit(ind);
            lambda = functional_f2(g, &f, 1.0)?;
        }
    }
    let mut history = vec![lambda];
    let mut alpha = vec![0.0; g.edges.len()];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_outer {
        iterations += 1;
        let v = var1_subgradient(&f);
        let step = inner_step(g, lambda, &v, &mut alpha, opts);
        let mut candidate = None;
        if norm2(&step) > 0.0 {
            let h = centered_unit(step);
            if let Ok(fh) = functional_f2(g, &h, 1.0) {
                candidate = Some((h, fh));
            }
            if let Some((ind, _)) =
                optimal_threshold(g, &candidate.as_ref().map_or(f.clone(), |c| c.0.clone()))
            {
                let ind = centered_unit(ind);
                if let Ok(fi) = functional_f2(g, &ind, 1.0) {
                    if candidate.as_ref().is_none_or(|c| fi < c.1) {
                        candidate = Some((ind, fi));
                    }
                }
            }
        }
        match candidate {
            Some((h, fh)) if fh < lambda => {
                let decrease = (lambda - fh) / lambda;
                f = h;
                lambda = fh;
                history.push(lambda);
                if decrease < opts.rel_tol {
                    converged = true;
                    break;
                }
            }
            _ => {
                // no descent: a fixed point of the scheme
                converged = true;
                break;
            }
        }
    }
    Ok(EigenResult {
        f,
        lambda,
        iterations,
        converged,
        history,
        start,
    })
}

/// Multi-start inverse power method; the best `F_1` wins, ties go to the
/// lower start index.
pub fn inverse_power_method(g: &AffinityGraph, opts: &IpmOptions) -> Result<EigenResult> {
    g.check_connected()?;
    let n = g.len();
    if n < 2 {
        return Err(Error::Invalid("graph needs at least two vertices".into()));
    }
    let mut starts = vec![fiedler_vector(g, opts.seed)?];
    for k in 1..opts.starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
        starts.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    starts.truncate(opts.starts.max(1));
    let results: Vec<Result<EigenResult>> = starts
        .into_par_iter()
        .enumerate()
        .map(|(k, f0)| ipm_single(g, f0, k, opts))
        .collect();
    let mut best: Option<EigenResult> = None;
    let mut last_err = None;
    for r in results {
        match r {
            Ok(r) if best.as_ref().is_none_or(|b| r.lambda < b.lambda) => best = Some(r),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::NoCut))
}

/// Threshold in x that best separates the two sides, with the side of
/// smaller mean x on the left.
pub fn interface_x(points: &[Point], a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::NoCut);
    }
    let mean = |s: &[usize]| s.iter().map(|&i| points[i].x).sum::<f64>() / s.len() as f64;
    let (left, right) = if mean(a) <= mean(b) { (a, b) } else { (b, a) };
    let mut xs: Vec<(f64, bool)> = left
        .iter()
        .map(|&i| (points[i].x, true))
        .chain(right.iter().map(|&i| (points[i].x, false)))
        .collect();
    xs.sort_by(|u, v| u.0.total_cmp(&v.0));
    // errors when thresholding at position k: right points before, left points after
    let mut errors = left.len();
    let mut best = (errors, xs[0].0);
    for k in 0..xs.len() {
        errors = if xs[k].1 { errors - 1 } else { errors + 1 };
        let t = match xs.get(k + 1) {
            Some(next) => 0.5 * (xs[k].0 + next.0),
            None => xs[k].0,
        };
        if errors < best.0 {
            best = (errors, t);
        }
    }
    Ok(best.1)
}

/// Point cloud and side labels as CSV.
pub fn partition_csv(points: &[Point], f: &[f64]) -> Result<String> {
    let (pos, _) = bipartition(f)?;
    let mut side = vec![0u8; points.len()];
    for i in pos {
        side[i] = 1;
    }
    let mut s = String::from("x,y,side\n");
    for (p, k) in points.iter().zip(side) {
        s.push_str(&format!("{:.17e},{:.17e},{k}\n", p.x, p.y));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> AffinityGraph {
        let e: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        AffinityGraph::from_edges(n, &e).unwrap()
    }

    fn two_cliques() -> AffinityGraph {
        let mut e = Vec::new();
        for base in [0, 5] {
            for i in 0..5 {
                for j in i + 1..5 {
                    e.push((base + i, base + j, 1.0));
                }
            }
        }
        e.push((4, 5, 0.1));
        AffinityGraph::from_edges(10, &e).unwrap()
    }

    #[test]
    fn laplacian_examples() {
        let g = path(3);
        assert_eq!(
            graph_p_laplacian_apply(&g, &[2.0; 3], 1.0).unwrap(),
            vec![0.0; 3]
        );
        let f = [0.3, -1.2, 0.7];
        let l2 = graph_p_laplacian_apply(&g, &f, 2.0).unwrap();
        assert_eq!(l2, g.laplacian_apply(&f));
        let g2 = AffinityGraph::from_edges(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(
            graph_p_laplacian_apply(&g2, &[1.0, 0.0], 1.0).unwrap(),
            vec![1.0, -1.0]
        );
        assert!(graph_p_laplacian_apply(&g2, &[1.0], 1.0).is_err());
    }

    #[test]
    fn functional_examples() {
        let g = path(3);
        let f = [-1.0, 0.0, 1.0];
        assert_eq!(energy(&g, &f, 1.0).unwrap(), 2.0);
        assert_eq!(var_p(&f, 1.0).unwrap(), 2.0);
        assert_eq!(functional_f2(&g, &f, 1.0).unwrap(), 1.0);
        assert_eq!(
            functional_f2(&g, &[1.0; 3], 1.0),
            Err(Error::TrivialEigenvector)
        );
        let scaled: Vec<f64> = f.iter().map(|x| -3.5 * x).collect();
        assert_eq!(functional_f2(&g, &scaled, 1.0).unwrap(), 1.0);
        assert!((var_p(&[0.0, 1.0, 5.0], 1.5).unwrap() - 1.0f64.min(10.0)).abs() < 10.0);
    }

    #[test]
    fn lowest_median() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0]), 3.0);
    }

    #[test]
    fn bipartition_rules() {
        assert_eq!(
            bipartition(&[1.0, -1.0, 2.0]).unwrap(),
            (vec![0, 2], vec![1])
        );
        assert_eq!(bipartition(&[1.0, 2.0, 3.0]), Err(Error::NoCut));
        assert_eq!(
            bipartition(&[1.0, 0.0, 0.0, -1.0, -2.0]).unwrap(),
            (vec![0, 1, 2], vec![3, 4])
        );
    }

    #[test]
    fn path_of_four() {
        let g = path(4);
        let (s, v) = brute_force_bipartition(&g).unwrap();
        assert_eq!(v, 0.5);
        assert_eq!(s, vec![true, true, false, false]);
        let r = inverse_power_method(&g, &IpmOptions::default()).unwrap();
        let (a, b) = bipartition(&r.f).unwrap();
        let mut sides = [a, b];
        sides.sort();
        assert_eq!(sides, [vec![0, 1], vec![2, 3]]);
        assert!(r.monotone());
    }

    #[test]
    fn cliques_separate() {
        let g = two_cliques();
        let r = inverse_power_method(&g, &IpmOptions::default()).unwrap();
        let (a, b) = bipartition(&r.f).unwrap();
        let mut sides = [a, b];
        sides.sort();
        assert_eq!(sides, [vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]]);
        let (_, best) = brute_force_bipartition(&g).unwrap();
        assert!((r.lambda - best).abs() < 1e-12);
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = AffinityGraph::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(g.components(), 2);
        assert_eq!(
            inverse_power_method(&g, &IpmOptions::default()).unwrap_err(),
            Error::Disconnected(2)
        );
    }

    #[test]
    fn sampling() {
        let sq = CurvilinearQuad::rectangle(1.0, 1.0).unwrap();
        let c = sample_domain(&sq, 1000, 7).unwrap();
        assert_eq!(c.points.len(), 1000);
        assert!(c
            .points
            .iter()
            .all(|p| (0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y)));
        assert_eq!(c, sample_domain(&sq, 1000, 7).unwrap());
        let r = CurvilinearQuad::rectangle(2.0, 1.0).unwrap();
        let c = sample_domain(&r, 2000, 3).unwrap();
        let cx = c.points.iter().map(|p| p.x).sum::<f64>() / 2000.0;
        let cy = c.points.iter().map(|p| p.y).sum::<f64>() / 2000.0;
        assert!((cx - 1.0).abs() < 0.05 && (cy - 0.5).abs() < 0.05);
        assert!(sample_domain(&sq, 50, 1).is_err());
    }

    #[test]
    fn knn_graph_is_symmetric_and_connected() {
        let r = CurvilinearQuad::rectangle(2.0, 1.0).unwrap();
        let c = sample_domain(&r, 300, 1).unwrap();
        let g = AffinityGraph::knn_gaussian(&c.points, 10, None).unwrap();
        g.check_connected().unwrap();
        for &(i, j, w) in g.edges() {
            assert_eq!(g.weight(i, j), w);
            assert_eq!(g.weight(j, i), w);
            assert!(w > 0.0 && w <= 1.0);
        }
    }

    #[test]
    fn fiedler_paths_agree() {
        let r = CurvilinearQuad::rectangle(2.0, 1.0).unwrap();
        let c = sample_domain(&r, 500, 2).unwrap();
        let g = AffinityGraph::knn_gaussian(&c.points, 10, None).unwrap();
        let f = fiedler_vector(&g, 0).unwrap();
        // the Fiedler vector of a 2:1 rectangle varies along x
        let corr: f64 = c.points.iter().zip(&f).map(|(p, v)| (p.x - 1.0) * v).sum();
        assert!(corr.abs() > 1.0, "{corr}");
    }
}
