//! One-parameter families comparing the optimal ratio cut with the ratio cut
//! at the predicted cut.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::CurvilinearQuad;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, CutParams, DomainParams, Param, Point, DEFAULT_GATE};
use crate::perturbation::{predict_cut_gated, Order};
use crate::ratiocut::{optimize_cut, ratio_cut_gated, CutDomain, OptimizeOptions, TrapezoidDomain};
use crate::svg::{filmstrip, line_plot, Drawing, Series, DOT_DASH};

/// `σ(s) = fixed + s · direction` for `s` on an evenly spaced range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub label: String,
    pub direction: DomainParams,
    pub range: (f64, f64),
    pub count: usize,
    pub fixed: DomainParams,
}

impl SweepSpec {
    /// `path` is a parameter name or a linked pair `a1=[-]param[/n]`, the
    /// latter meaning `param = ±n · a1`.
    pub fn new(path: &str, range: (f64, f64), count: usize) -> Result<Self> {
        if !(range.0 <= range.1) || count < 2 {
            return Err(Error::Invalid(format!(
                "sweep needs lo ≤ hi and at least 2 samples, got {range:?} × {count}"
            )));
        }
        let mut direction = DomainParams::zero();
        let label = match path.split_once('=') {
            None => {
                let p: Param = path.trim().parse()?;
                direction.set(p, 1.0);
                p.name().to_string()
            }
            Some((lhs, rhs)) => {
                let lead: Param = lhs.trim().parse()?;
                let rhs = rhs.trim();
                let (sign, rest) = match rhs.strip_prefix('-') {
                    Some(r) => (-1.0, r),
                    None => (1.0, rhs),
                };
                let (name, den) = match rest.split_once('/') {
                    Some((n, d)) => (
                        n,
                        d.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::Invalid(format!("bad ratio in `{path}`")))?,
                    ),
                    None => (rest, 1),
                };
                let linked: Param = name.trim().parse()?;
                if linked == lead || den == 0 {
                    return Err(Error::Invalid(format!("bad linked pair `{path}`")));
                }
                direction.set(lead, 1.0);
                direction.set(linked, sign * den as f64);
                lead.name().to_string()
            }
        };
        Ok(Self {
            name: path.replace(' ', ""),
            label,
            direction,
            range,
            count,
            fixed: DomainParams::zero(),
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = self.range;
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| lo + (hi - lo) * k as f64 / n)
            .collect()
    }

    pub fn sigma(&self, s: f64) -> DomainParams {
        let (f, d) = (self.fixed.to_array(), self.direction.to_array());
        DomainParams::from_array(std::array::from_fn(|i| f[i] + s * d[i]))
    }

    /// The eight comparison families, 21 samples each.
    pub fn families() -> Vec<SweepSpec> {
        [
            ("a1", (0.0, 0.1)),
            ("a1", (-0.1, 0.0)),
            ("A_WL", (0.0, 0.1)),
            ("eps_t", (-0.5, 0.0)),
            ("a1=a3", (0.0, 0.1)),
            ("a1=-a3", (0.0, 0.1)),
            ("a1=-eps_t/5", (0.0, 0.1)),
            ("a1=eps_b/5", (0.0, 0.1)),
        ]
        .iter()
        .map(|(p, r)| SweepSpec::new(p, *r, 21).expect("valid family"))
        .collect()
    }
}

impl FromStr for SweepSpec {
    type Err = Error;

    /// `path:lo:hi[:count]`, count defaulting to 21.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("bad number `{t}` in sweep `{s}`")))
        };
        match parts.as_slice() {
            [p, lo, hi] => SweepSpec::new(p, (num(lo)?, num(hi)?), 21),
            [p, lo, hi, n] => SweepSpec::new(
                p,
                (num(lo)?, num(hi)?),
                n.trim()
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad count in sweep `{s}`")))?,
            ),
            _ => Err(Error::Invalid(format!(
                "sweep spec `{s}` is not path:lo:hi[:count]"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub gate: f64,
    pub order: Order,
    pub optimize: OptimizeOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            gate: DEFAULT_GATE,
            order: Order::First,
            optimize: OptimizeOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub sigma: DomainParams,
    pub rc_opt: f64,
    pub rc_approx: f64,
    pub abs_err: f64,
    pub cut_opt: Option<CutParams>,
    pub cut_pred: Option<CutParams>,
    /// `None` when the row is complete, otherwise what failed.
    pub status: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

fn run_row(spec: &SweepSpec, s: f64, opts: &SweepOptions) -> SweepRow {
    let sigma = spec.sigma(s);
    let mut row = SweepRow {
        param: s,
        sigma,
        rc_opt: f64::NAN,
        rc_approx: f64::NAN,
        abs_err: f64::NAN,
        cut_opt: None,
        cut_pred: None,
        status: None,
    };
    let mut problems = Vec::new();
    let oo = OptimizeOptions {
        gate: opts.gate,
        ..opts.optimize.clone()
    };
    match optimize_cut(&sigma, &oo) {
        Ok(r) => {
            row.rc_opt = r.breakdown.value;
            row.cut_opt = Some(r.cut);
        }
        Err(e) => problems.push(format!("optimize: {e}")),
    }
    match predict_cut_gated(&sigma, opts.order, opts.gate) {
        Ok(c) => {
            row.cut_pred = Some(c);
            match ratio_cut_gated(&sigma, &c, opts.gate) {
                Ok(b) => row.rc_approx = b.value,
                Err(e) => problems.push(format!("approx: {e}")),
            }
        }
        Err(e) => problems.push(format!("predict: {e}")),
    }
    row.abs_err = (row.rc_approx - row.rc_opt).abs();
    if !problems.is_empty() {
        row.status = Some(problems.join("; "));
    }
    row
}

/// Evaluates every sample in parallel; rows come back sorted by parameter.
pub fn run_sweep(spec: &SweepSpec, opts: &SweepOptions) -> SweepResult {
    let mut rows: Vec<SweepRow> = spec
        .values()
        .par_iter()
        .map(|&s| run_row(spec, s, opts))
        .collect();
    rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    SweepResult {
        spec: spec.clone(),
        rows,
    }
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.15e}")
    } else {
        "nan".into()
    }
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "param,rc_opt,rc_approx,abs_err,q_opt,p_opt,theta_opt,q_pred,p_pred,theta_pred,status\n",
        );
        for r in &self.rows {
            let cut = |c: Option<CutParams>| c.map_or([f64::NAN; 3], |c| c.to_array());
            let (o, p) = (cut(r.cut_opt), cut(r.cut_pred));
            let status = r
                .status
                .as_deref()
                .unwrap_or("ok")
                .replace([',', '\n'], ";");
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{status}",
                num(r.param),
                num(r.rc_opt),
                num(r.rc_approx),
                num(r.abs_err),
                num(o[0]),
                num(o[1]),
                num(o[2]),
                num(p[0]),
                num(p[1]),
                num(p[2]),
            );
        }
        s
    }

    /// Row whose parameter is closest to zero.
    pub fn origin_row(&self) -> &SweepRow {
        self.rows
            .iter()
            .min_by(|a, b| a.param.abs().total_cmp(&b.param.abs()))
            .expect("at least two rows")
    }

    /// Places where the error decreases while `|param|` increases, over the
    /// rows that completed.
    pub fn growth_violations(&self) -> usize {
        let mut rows: Vec<&SweepRow> = self.rows.iter().filter(|r| r.abs_err.is_finite()).collect();
        rows.sort_by(|a, b| a.param.abs().total_cmp(&b.param.abs()));
        rows.windows(2)
            .filter(|w| !(w[1].abs_err >= w[0].abs_err))
            .count()
    }

    pub fn values_svg(&self) -> String {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.param).collect();
        let opt: Vec<f64> = self.rows.iter().map(|r| r.rc_opt).collect();
        let apx: Vec<f64> = self.rows.iter().map(|r| r.rc_approx).collect();
        line_plot(
            &format!("ratio cut, {}", self.spec.name),
            &self.spec.label,
            "RC",
            &[
                Series {
                    label: "optimal",
                    xs: &xs,
                    ys: &opt,
                    color: "#1f77b4",
                    dash: None,
                },
                Series {
                    label: "approximate",
                    xs: &xs,
                    ys: &apx,
                    color: "#d62728",
                    dash: Some(DOT_DASH),
                },
            ],
        )
    }

    pub fn error_svg(&self) -> String {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.param).collect();
        let err: Vec<f64> = self.rows.iter().map(|r| r.abs_err).collect();
        line_plot(
            &format!("absolute error, {}", self.spec.name),
            &self.spec.label,
            "|RC approx - RC opt|",
            &[Series {
                label: "error",
                xs: &xs,
                ys: &err,
                color: "#1f77b4",
                dash: None,
            }],
        )
    }

    /// Domain at the sample farthest from zero with both cuts.
    pub fn extremal_svg(&self) -> Result<String> {
        let row = self
            .rows
            .iter()
            .max_by(|a, b| a.param.abs().total_cmp(&b.param.abs()))
            .ok_or(Error::NoCut)?;
        let quad = CurvilinearQuad::from_sigma(&row.sigma)?;
        let outline: Vec<Point> = quad.sides.iter().flat_map(|s| s.sample(64)).collect();
        let dom = TrapezoidDomain::unchecked(&row.sigma);
        let arc = |c: &CutParams| -> Result<Vec<Point>> {
            Ok(BoundaryCurve::arc(dom.bottom_point(c.q)?, dom.top_point(c.p)?, c.theta).sample(64))
        };
        let mut curves = Vec::new();
        if let Some(c) = &row.cut_opt {
            curves.push((arc(c)?, "#1f77b4", None));
        }
        if let Some(c) = &row.cut_pred {
            curves.push((arc(c)?, "#d62728", Some(DOT_DASH)));
        }
        Ok(filmstrip(&[Drawing {
            outline: &outline,
            curves,
            caption: format!("{} = {}", self.spec.label, row.param),
        }]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linked_pairs() {
        let s = SweepSpec::new("a1=-eps_t/5", (0.0, 0.1), 3).unwrap();
        let sig = s.sigma(0.1);
        assert_eq!(sig.a1, 0.1);
        assert!((sig.eps_t + 0.5).abs() < 1e-15);
        let s = SweepSpec::new("a1=-a3", (0.0, 0.1), 3).unwrap();
        assert_eq!(s.sigma(0.05).a3, -0.05);
        assert!(SweepSpec::new("a1", (0.1, 0.0), 3).is_err());
        assert!(SweepSpec::new("a1", (0.0, 0.1), 1).is_err());
        assert!("a1:0:0.1:5".parse::<SweepSpec>().is_ok());
        assert!("a1=a1".parse::<SweepSpec>().is_err());
        assert_eq!(SweepSpec::families().len(), 8);
    }

    #[test]
    fn small_sweep() {
        let spec = SweepSpec::new("a1", (0.0, 0.04), 5).unwrap();
        let r = run_sweep(&spec, &SweepOptions::default());
        assert!(r.rows.iter().all(|r| r.status.is_none()));
        assert!(r.origin_row().abs_err < 1e-12);
        assert_eq!(r.growth_violations(), 0);
        assert_eq!(r.to_csv().lines().count(), 6);
        assert_eq!(
            r.to_csv(),
            run_sweep(&spec, &SweepOptions::default()).to_csv()
        );
    }

    #[test]
    fn gate_flags_rows() {
        let spec = SweepSpec::new("eps_t", (-0.5, 0.0), 3).unwrap();
        let r = run_sweep(&spec, &SweepOptions::default());
        assert!(r.rows[0].status.as_deref().unwrap().contains("gate"));
        assert!(r.rows[2].status.is_none());
    }
}
