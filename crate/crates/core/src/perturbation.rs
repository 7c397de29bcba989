//! Quadratic expansion of the ratio cut around the ½×1 rectangle.
//!
//! Every coefficient polynomial is quadratic in `(q−½, p−½, θ)`. The
//! polynomials attached to parameter multi-indices follow the derivative
//! convention: `p_α = ∂_α RC` and `p_αα = ∂²_α RC`, so the series reads
//!
//! ```text
//! RC ≈ base + Σ σ_α p_α + Σ_{α<β} σ_α σ_β p_αβ + ½ Σ σ_α² p_αα.
//! ```
//!
//! The cut-variable coefficients are plain Taylor coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{CurvilinearQuad, Provenance};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, CutParams, DomainParams, Param, Point, DEFAULT_GATE};
use crate::numdiff::{taylor_coefficient, Axis};
use crate::ratiocut::{evaluate, ratio_cut_value_unchecked, CutDomain, TrapezoidDomain};

/// Exact rational number, used only for storage and display.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

pub const fn r(num: i64, den: i64) -> Ratio {
    Ratio { num, den }
}

const fn z() -> Ratio {
    r(0, 1)
}

impl Ratio {
    pub fn reduced(num: i64, den: i64) -> Ratio {
        let (mut a, mut b) = (num.abs(), den.abs());
        while b != 0 {
            (a, b) = (b, a % b);
        }
        let g = a.max(1) * den.signum();
        r(num / g, den / g)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Ratio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("bad rational `{s}`"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num = n.trim().parse().map_err(|_| bad())?;
        let den: i64 = d.trim().parse().map_err(|_| bad())?;
        if den <= 0 {
            return Err(bad());
        }
        Ok(r(num, den))
    }
}

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub const SLOT_NAMES: [&str; 10] = [
    "1", "q", "p", "theta", "q^2", "q*p", "q*theta", "p^2", "p*theta", "theta^2",
];

/// Exponents of `(q−½, p−½, θ)` for each slot.
pub const SLOT_EXPONENTS: [[usize; 3]; 10] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [2, 0, 0],
    [1, 1, 0],
    [1, 0, 1],
    [0, 2, 0],
    [0, 1, 1],
    [0, 0, 2],
];

/// Quadratic polynomial in `(q−½, p−½, θ)`, slots ordered as [`SLOT_NAMES`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuadPoly {
    pub coeffs: [Ratio; 10],
}

impl QuadPoly {
    pub const ZERO: QuadPoly = QuadPoly { coeffs: [z(); 10] };

    pub fn values(&self) -> [f64; 10] {
        self.coeffs.map(Ratio::to_f64)
    }

    pub fn eval(&self, cut: &CutParams) -> f64 {
        let [u, v, w] = cut.offset();
        let c = self.values();
        c[0] + c[1] * u
            + c[2] * v
            + c[3] * w
            + c[4] * u * u
            + c[5] * u * v
            + c[6] * u * w
            + c[7] * v * v
            + c[8] * v * w
            + c[9] * w * w
    }

    pub fn gradient_at_center(&self) -> [f64; 3] {
        let c = self.values();
        [c[1], c[2], c[3]]
    }

    pub fn hessian(&self) -> [[f64; 3]; 3] {
        let c = self.values();
        [
            [2.0 * c[4], c[5], c[6]],
            [c[5], 2.0 * c[7], c[8]],
            [c[6], c[8], 2.0 * c[9]],
        ]
    }
}

/// A coefficient label: the constant term, one parameter or an unordered pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MultiIndex {
    Base,
    First(Param),
    Second(Param, Param),
}

impl MultiIndex {
    pub fn new(params: &[Param]) -> Result<Self> {
        match params {
            [] => Ok(MultiIndex::Base),
            [a] => Ok(MultiIndex::First(*a)),
            [a, b] => Ok(MultiIndex::Second(*a.min(b), *a.max(b))),
            _ => Err(Error::Invalid(format!(
                "multi-index of order {} exceeds 2",
                params.len()
            ))),
        }
    }

    pub fn params(&self) -> Vec<Param> {
        match *self {
            MultiIndex::Base => vec![],
            MultiIndex::First(a) => vec![a],
            MultiIndex::Second(a, b) => vec![a, b],
        }
    }

    /// Order of each parameter axis, for derivative extraction.
    pub fn sigma_orders(&self) -> Vec<(Param, usize)> {
        match *self {
            MultiIndex::Base => vec![],
            MultiIndex::First(a) => vec![(a, 1)],
            MultiIndex::Second(a, b) if a == b => vec![(a, 2)],
            MultiIndex::Second(a, b) => vec![(a, 1), (b, 1)],
        }
    }

    /// `α!`, the factor between a derivative and a Taylor coefficient.
    pub fn factorial(&self) -> f64 {
        match *self {
            MultiIndex::Second(a, b) if a == b => 2.0,
            _ => 1.0,
        }
    }

    /// Multiplier of the polynomial in the series for the given σ.
    pub fn weight(&self, s: &DomainParams) -> f64 {
        match *self {
            MultiIndex::Base => 1.0,
            MultiIndex::First(a) => s.get(a),
            MultiIndex::Second(a, b) => s.get(a) * s.get(b) / self.factorial(),
        }
    }

    pub fn all() -> Vec<MultiIndex> {
        let mut v = vec![MultiIndex::Base];
        v.extend(Param::ALL.iter().map(|&p| MultiIndex::First(p)));
        for (i, &a) in Param::ALL.iter().enumerate() {
            for &b in &Param::ALL[i..] {
                v.push(MultiIndex::Second(a, b));
            }
        }
        v
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiIndex::Base => f.write_str("1"),
            MultiIndex::First(a) => write!(f, "{a}"),
            MultiIndex::Second(a, b) => write!(f, "{a}*{b}"),
        }
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(MultiIndex::Base);
        }
        let params = s
            .split(['*', ','])
            .map(str::parse)
            .collect::<Result<Vec<Param>>>()?;
        MultiIndex::new(&params)
    }
}

/// A slot whose printed value disagrees with the expansion of the functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Erratum {
    #[serde(serialize_with = "ser_display")]
    pub index: MultiIndex,
    pub slot: usize,
    pub printed: Ratio,
    pub corrected: Ratio,
}

fn ser_display<S: serde::Serializer, T: fmt::Display>(
    v: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

use Param::{EpsB as EB, EpsT as ET, WingLeft as WL, WingRight as WR, A1, A2, A3};

pub const ERRATA: [Erratum; 5] = [
    Erratum {
        index: MultiIndex::Second(A2, WR),
        slot: 5,
        printed: r(80, 3),
        corrected: r(-256, 1),
    },
    Erratum {
        index: MultiIndex::Second(A2, WR),
        slot: 6,
        printed: r(1, 1),
        corrected: r(80, 3),
    },
    Erratum {
        index: MultiIndex::Second(EB, WR),
        slot: 6,
        printed: r(-32, 3),
        corrected: r(-32, 9),
    },
    Erratum {
        index: MultiIndex::Second(ET, ET),
        slot: 8,
        printed: r(4, 27),
        corrected: r(-4, 27),
    },
    Erratum {
        index: MultiIndex::Second(EB, EB),
        slot: 8,
        printed: r(4, 27),
        corrected: r(-4, 27),
    },
];

macro_rules! poly {
    ($($n:literal $(/ $d:literal)?),* $(,)?) => {
        QuadPoly { coeffs: [$(poly!(@r $n $(/ $d)?)),*] }
    };
    (@r $n:literal) => { r($n, 1) };
    (@r $n:literal / $d:literal) => { r($n, $d) };
}

const BASE: QuadPoly = poly![8, 0, 0, 0, 24, -16, 4 / 3, 24, 4 / 3, 7 / 18];

const FIRST: [(Param, QuadPoly); 7] = [
    (A1, poly![-8, 8, -8, 2 / 3, -56, 80, 0, -56, 0, -5 / 18]),
    (A2, poly![-8, -8, 8, -2 / 3, -56, 80, 0, -56, 0, -5 / 18]),
    (A3, poly![8, -8, 8, 2 / 3, 56, -80, 0, 56, 0, 5 / 18]),
    (
        ET,
        poly![
            4 / 3,
            0,
            0,
            0,
            52 / 3,
            -40,
            -8 / 9,
            100 / 3,
            -8 / 9,
            -1 / 108
        ],
    ),
    (
        EB,
        poly![
            -4 / 3,
            0,
            0,
            0,
            -100 / 3,
            40,
            8 / 9,
            -52 / 3,
            8 / 9,
            1 / 108
        ],
    ),
    (
        WL,
        poly![-32, 32, 32, 8 / 3, -128, 0, -32 / 3, -128, -32 / 3, -16 / 9],
    ),
    (
        WR,
        poly![
            -32,
            -32,
            -32,
            -8 / 3,
            -128,
            0,
            -32 / 3,
            -128,
            -32 / 3,
            -16 / 9
        ],
    ),
];

// Transcribed as printed, including the slots listed in ERRATA.
const SECOND: [(Param, Param, QuadPoly); 28] = [
    (A1, A1, poly![20, -32, 32, -4 / 3, 240, -384, 4, 208, -4, 1]),
    (A1, A2, poly![12, 0, 0, 0, 176, -320, -4, 208, 4, 1 / 3]),
    (
        A1,
        A3,
        poly![-12, 32, -32, 0, -192, 320, 0, -192, 0, -1 / 3],
    ),
    (A2, A2, poly![20, 32, -32, 4 / 3, 240, -384, 4, 208, -4, 1]),
    (A2, A3, poly![-20, 0, 0, -4 / 3, -224, 384, 0, -224, 0, -1]),
    (A3, A3, poly![20, -32, 32, 4 / 3, 208, -384, -4, 240, 4, 1]),
    (
        A1,
        WL,
        poly![80, -128, -64, -8, 512, -256, 80 / 3, 448, 32 / 3, 4],
    ),
    (
        A1,
        WR,
        poly![48, 0, 64, -8 / 3, 256, -256, -16 / 3, 320, 32 / 3, 4 / 3],
    ),
    (
        A1,
        ET,
        poly![
            -8 / 3,
            8 / 3,
            -8,
            -1 / 9,
            -72,
            464 / 3,
            8 / 9,
            -104,
            8 / 9,
            -1 / 9
        ],
    ),
    (
        A1,
        EB,
        poly![
            8 / 3,
            -8 / 3,
            8,
            1 / 9,
            104,
            -464 / 3,
            -8 / 9,
            72,
            -8 / 9,
            1 / 9
        ],
    ),
    (
        A2,
        WL,
        poly![48, 0, -64, 8 / 3, 256, -256, -16 / 3, 320, 32 / 3, 4 / 3],
    ),
    (
        A2,
        WR,
        poly![80, 128, 64, 8, 512, 80 / 3, 1, 448, 32 / 3, 4],
    ),
    (
        A2,
        ET,
        poly![
            -8 / 3,
            -8 / 3,
            8,
            1 / 9,
            -72,
            464 / 3,
            8 / 9,
            -104,
            8 / 9,
            -1 / 9
        ],
    ),
    (
        A2,
        EB,
        poly![
            8 / 3,
            8 / 3,
            -8,
            -1 / 9,
            104,
            -464 / 3,
            -8 / 9,
            72,
            -8 / 9,
            1 / 9
        ],
    ),
    (
        A3,
        WL,
        poly![-48, 64, 0, -8 / 3, -320, 256, -32 / 3, -256, 16 / 3, -4 / 3],
    ),
    (
        A3,
        WR,
        poly![-80, -64, -128, -8, -448, 256, -32 / 3, -512, -80 / 3, -4],
    ),
    (
        A3,
        ET,
        poly![
            8 / 3,
            -8,
            8 / 3,
            -1 / 9,
            72,
            -464 / 3,
            -8 / 9,
            104,
            -8 / 9,
            1 / 9
        ],
    ),
    (
        A3,
        EB,
        poly![
            -8 / 3,
            8,
            -8 / 3,
            1 / 9,
            -104,
            464 / 3,
            8 / 9,
            -72,
            8 / 9,
            -1 / 9
        ],
    ),
    (
        WL,
        WL,
        poly![
            256,
            -512,
            -512,
            -128 / 3,
            1536,
            1024,
            512 / 3,
            1536,
            512 / 3,
            160 / 9
        ],
    ),
    (
        WL,
        WR,
        poly![128, 0, 0, 0, 512, 0, 128 / 3, 512, 128 / 3, 64 / 9],
    ),
    (
        WR,
        WR,
        poly![
            256,
            512,
            512,
            128 / 3,
            1536,
            1024,
            512 / 3,
            1536,
            512 / 3,
            160 / 9
        ],
    ),
    (
        ET,
        WL,
        poly![
            -16,
            32 / 3,
            32 / 3,
            -4 / 9,
            -320 / 3,
            512 / 3,
            32 / 9,
            -512 / 3,
            32 / 9,
            -8 / 27
        ],
    ),
    (
        EB,
        WL,
        poly![
            16,
            -32 / 3,
            -32 / 3,
            4 / 9,
            512 / 3,
            -512 / 3,
            -32 / 9,
            320 / 3,
            -32 / 9,
            8 / 27
        ],
    ),
    (
        ET,
        WR,
        poly![
            -16,
            -32 / 3,
            -32 / 3,
            4 / 9,
            -320 / 3,
            512 / 3,
            32 / 9,
            -512 / 3,
            32 / 9,
            -8 / 27
        ],
    ),
    (
        EB,
        WR,
        poly![
            16,
            32 / 3,
            32 / 3,
            -4 / 9,
            512 / 3,
            -512 / 3,
            -32 / 3,
            320 / 3,
            -32 / 9,
            8 / 27
        ],
    ),
    (
        ET,
        ET,
        poly![
            0,
            0,
            0,
            0,
            244 / 9,
            -568 / 9,
            -4 / 27,
            436 / 9,
            4 / 27,
            5 / 162
        ],
    ),
    (
        ET,
        EB,
        poly![
            0,
            0,
            0,
            0,
            -340 / 9,
            568 / 9,
            4 / 27,
            -340 / 9,
            4 / 27,
            -5 / 162
        ],
    ),
    (
        EB,
        EB,
        poly![
            0,
            0,
            0,
            0,
            436 / 9,
            -568 / 9,
            -4 / 27,
            244 / 9,
            4 / 27,
            5 / 162
        ],
    ),
];

/// All expansion polynomials keyed by multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionTable {
    entries: BTreeMap<MultiIndex, QuadPoly>,
}

impl ExpansionTable {
    /// The appendix exactly as printed.
    pub fn printed() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(MultiIndex::Base, BASE);
        for (p, poly) in FIRST {
            entries.insert(MultiIndex::First(p), poly);
        }
        for (a, b, poly) in SECOND {
            entries.insert(MultiIndex::new(&[a, b]).expect("order 2"), poly);
        }
        Self { entries }
    }

    /// The printed appendix with [`ERRATA`] applied.
    pub fn corrected() -> Self {
        let mut t = Self::printed();
        for e in ERRATA {
            t.set_slot(e.index, e.slot, e.corrected);
        }
        t
    }

    pub fn get(&self, idx: MultiIndex) -> Option<&QuadPoly> {
        self.entries.get(&idx)
    }

    pub fn set_slot(&mut self, idx: MultiIndex, slot: usize, value: Ratio) {
        self.entries.entry(idx).or_insert(QuadPoly::ZERO).coeffs[slot] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &QuadPoly)> {
        self.entries.iter()
    }

    pub fn base(&self) -> QuadPoly {
        self.get(MultiIndex::Base)
            .copied()
            .unwrap_or(QuadPoly::ZERO)
    }

    fn poly(&self, idx: MultiIndex) -> QuadPoly {
        self.get(idx).copied().unwrap_or(QuadPoly::ZERO)
    }

    pub fn quadratic_approx(&self, sigma: &DomainParams, cut: &CutParams) -> f64 {
        self.entries
            .iter()
            .map(|(idx, poly)| idx.weight(sigma) * poly.eval(cut))
            .sum()
    }

    /// Hessian of the base polynomial.
    pub fn jacobian_base(&self) -> [[f64; 3]; 3] {
        self.base().hessian()
    }

    /// First-order change of the Hessian: `Σ σ_α Hess p_α`.
    pub fn jacobian_sigma(&self, sigma: &DomainParams) -> [[f64; 3]; 3] {
        let mut j = [[0.0; 3]; 3];
        for p in Param::ALL {
            let h = self.poly(MultiIndex::First(p)).hessian();
            let s = sigma.get(p);
            for (row, hrow) in j.iter_mut().zip(h) {
                for (x, hv) in row.iter_mut().zip(hrow) {
                    *x += s * hv;
                }
            }
        }
        j
    }

    /// Right-hand side of the critical-point system: minus the gradient at
    /// the base cut, through quadratic order in σ. `linear_only` drops the
    /// σ² terms.
    pub fn rhs_l(&self, sigma: &DomainParams, linear_only: bool) -> [f64; 3] {
        let mut l = [0.0; 3];
        for (idx, poly) in &self.entries {
            let w = match idx {
                MultiIndex::Base => continue,
                MultiIndex::Second(..) if linear_only => continue,
                _ => idx.weight(sigma),
            };
            for (li, gi) in l.iter_mut().zip(poly.gradient_at_center()) {
                *li -= w * gi;
            }
        }
        l
    }

    pub fn predict(&self, sigma: &DomainParams, order: Order) -> Result<CutParams> {
        let j = self.jacobian_base();
        let (m, l) = match order {
            Order::First => (j, self.rhs_l(sigma, true)),
            Order::Full => {
                let js = self.jacobian_sigma(sigma);
                let mut m = j;
                for i in 0..3 {
                    for k in 0..3 {
                        m[i][k] += js[i][k];
                    }
                }
                (m, self.rhs_l(sigma, false))
            }
        };
        let v = solve3(m, l)?;
        Ok(CutParams::new(0.5 + v[0], 0.5 + v[1], v[2]))
    }
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> Result<[f64; 3]> {
    let mat = Matrix3::from_fn(|i, j| m[i][j]);
    let sv = mat.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond.is_finite() && cond < 1e10) {
        return Err(Error::Singular(format!("condition number {cond:.3e}")));
    }
    let x = mat
        .lu()
        .solve(&Vector3::new(b[0], b[1], b[2]))
        .ok_or_else(|| Error::Singular("LU".into()))?;
    Ok([x[0], x[1], x[2]])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    First,
    Full,
}

impl FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(Order::First),
            "full" => Ok(Order::Full),
            o => Err(Error::Invalid(format!("unknown order `{o}`"))),
        }
    }
}

/// A table polynomial with bookkeeping flags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientEntry {
    pub poly: QuadPoly,
    /// Not present in the table; `poly` is zero.
    pub unlisted: bool,
    /// Slots where the corrected value differs from the printed one.
    pub corrected_slots: Vec<usize>,
}

/// Looks up a polynomial of the corrected table by parameter multi-index.
pub fn coefficient(alpha: &[Param]) -> Result<CoefficientEntry> {
    let idx = MultiIndex::new(alpha)?;
    let table = ExpansionTable::corrected();
    Ok(CoefficientEntry {
        poly: table.get(idx).copied().unwrap_or(QuadPoly::ZERO),
        unlisted: table.get(idx).is_none(),
        corrected_slots: ERRATA
            .iter()
            .filter(|e| e.index == idx)
            .map(|e| e.slot)
            .collect(),
    })
}

pub fn rc_quadratic_approx(sigma: &DomainParams, cut: &CutParams) -> f64 {
    ExpansionTable::corrected().quadratic_approx(sigma, cut)
}

pub fn jacobian_base() -> [[Ratio; 3]; 3] {
    let c = BASE.coeffs;
    let twice = |x: Ratio| Ratio::reduced(2 * x.num, x.den);
    [
        [twice(c[4]), c[5], c[6]],
        [c[5], twice(c[7]), c[8]],
        [c[6], c[8], twice(c[9])],
    ]
}

pub fn jacobian_sigma(sigma: &DomainParams) -> [[f64; 3]; 3] {
    ExpansionTable::corrected().jacobian_sigma(sigma)
}

pub fn rhs_l(sigma: &DomainParams) -> [f64; 3] {
    ExpansionTable::corrected().rhs_l(sigma, false)
}

pub fn predict_cut(sigma: &DomainParams, order: Order) -> Result<CutParams> {
    predict_cut_gated(sigma, order, DEFAULT_GATE)
}

pub fn predict_cut_gated(sigma: &DomainParams, order: Order, gate: f64) -> Result<CutParams> {
    sigma.check_gate(gate)?;
    ExpansionTable::corrected().predict(sigma, order)
}

/// Explicit first-order offset `(q−½, p−½, θ)` of the optimal cut.
pub fn first_order_offset(s: &DomainParams) -> [f64; 3] {
    let w = s.wing_left - s.wing_right;
    [
        -(s.a1 - s.a2 - 2.0 * s.a3) / 12.0 - w,
        (2.0 * s.a1 - 2.0 * s.a2 - s.a3) / 12.0 - w,
        -(s.a1 - s.a2 + s.a3),
    ]
}

/// Parabola curvatures whose caps match circular arcs of opening `θ_t`
/// (top, positive bulging up) and `θ_b` (bottom, positive bulging down).
pub fn curvature_from_arc(a1: f64, a2: f64, a3: f64, theta_t: f64, theta_b: f64) -> (f64, f64) {
    (
        -(1.0 + (a1 - a2).powi(2)) / 2.0 * theta_t,
        (1.0 + a3 * a3) / 2.0 * theta_b,
    )
}

/// The trapezoid with circular top and bottom arcs through the base corners.
pub fn circular_trapezoid(
    a1: f64,
    a2: f64,
    a3: f64,
    theta_t: f64,
    theta_b: f64,
) -> Result<CurvilinearQuad> {
    let bl = Point::new(0.0, 0.0);
    let br = Point::new(1.0, a3);
    let tr = Point::new(1.0, 0.5 + a2);
    let tl = Point::new(0.0, 0.5 + a1);
    CurvilinearQuad::new(
        [
            BoundaryCurve::arc(bl, br, theta_b),
            BoundaryCurve::line(br, tr),
            BoundaryCurve::arc(tr, tl, theta_t),
            BoundaryCurve::line(tl, bl),
        ],
        [Provenance::Original; 4],
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub eps_t: f64,
    pub eps_b: f64,
    pub curve_gap_top: f64,
    pub curve_gap_bottom: f64,
    pub total_area_gap: f64,
    pub left_area_gap: f64,
    pub rc_gap: f64,
}

fn gap_once(a1: f64, a2: f64, a3: f64, tt: f64, tb: f64, cut: &CutParams) -> Result<GapReport> {
    let (eps_t, eps_b) = curvature_from_arc(a1, a2, a3, tt, tb);
    let sigma = DomainParams {
        a1,
        a2,
        a3,
        eps_t,
        eps_b,
        ..DomainParams::zero()
    };
    let par = TrapezoidDomain::unchecked(&sigma);
    let circ = circular_trapezoid(a1, a2, a3, tt, tb)?;
    let mut gt: f64 = 0.0;
    let mut gb: f64 = 0.0;
    for k in 0..=200 {
        let x = k as f64 / 200.0;
        gt = gt.max((circ.top_y(x)? - sigma.top().eval(x)).abs());
        gb = gb.max((circ.bottom_y(x)? - sigma.bottom().eval(x)).abs());
    }
    let bp = evaluate(&par, cut, false)?;
    let bc = evaluate(&circ, cut, false)?;
    Ok(GapReport {
        eps_t,
        eps_b,
        curve_gap_top: gt,
        curve_gap_bottom: gb,
        total_area_gap: (par.total_area() - circ.total_area()).abs(),
        left_area_gap: (bp.area_left - bc.area_left).abs(),
        rc_gap: (bp.value - bc.value).abs(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapScaling {
    pub thetas: Vec<f64>,
    pub reports: Vec<GapReport>,
    /// Least-squares log-log slopes against θ.
    pub rc_exponent: f64,
    pub total_area_exponent: f64,
    pub left_area_exponent: f64,
    pub curve_exponent: f64,
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Gaps between circular and matched parabolic domains at `θ`, `θ/2`, `θ/4`
/// (both angles halved together), with empirical scaling exponents.
pub fn parabolic_circular_gap(
    a1: f64,
    a2: f64,
    a3: f64,
    theta_t: f64,
    theta_b: f64,
    cut: &CutParams,
) -> Result<GapScaling> {
    let scales = [1.0, 0.5, 0.25];
    let reports = scales
        .iter()
        .map(|s| gap_once(a1, a2, a3, theta_t * s, theta_b * s, cut))
        .collect::<Result<Vec<_>>>()?;
    let reference = theta_t.abs().max(theta_b.abs());
    let thetas: Vec<f64> = scales.iter().map(|s| reference * s).collect();
    let pick = |f: fn(&GapReport) -> f64| -> f64 {
        let ys: Vec<f64> = reports.iter().map(f).collect();
        loglog_slope(&thetas, &ys)
    };
    Ok(GapScaling {
        rc_exponent: pick(|r| r.rc_gap),
        total_area_exponent: pick(|r| r.total_area_gap),
        left_area_exponent: pick(|r| r.left_area_gap),
        curve_exponent: pick(|r| r.curve_gap_top.max(r.curve_gap_bottom)),
        thetas,
        reports,
    })
}

/// Stencil used to audit the table against the ratio cut itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    /// Stencil half-width per axis.
    pub half_width: usize,
    pub sigma_step: f64,
    pub cut_step: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            half_width: 4,
            sigma_step: 0.01,
            cut_step: 0.02,
            rel_tol: 1e-3,
            abs_tol: 1e-4,
        }
    }
}

impl AuditOptions {
    /// Smaller stencil, tolerances unchanged.
    pub fn quick() -> Self {
        Self {
            half_width: 3,
            sigma_step: 0.005,
            cut_step: 0.01,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditEntry {
    #[serde(serialize_with = "ser_display")]
    pub index: MultiIndex,
    pub slot: &'static str,
    pub table: Ratio,
    pub finite_difference: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub options: AuditOptions,
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    pub fn failures(&self) -> Vec<&AuditEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Finite-difference value of one slot in the table's convention.
pub fn fd_coefficient(idx: MultiIndex, slot: usize, opts: &AuditOptions) -> Result<f64> {
    let f = |x: &[f64]| {
        let mut s = [0.0; 7];
        s.copy_from_slice(&x[..7]);
        let cut = CutParams::new(0.5 + x[7], 0.5 + x[8], x[9]);
        ratio_cut_value_unchecked(&DomainParams::from_array(s), &cut).unwrap_or(f64::NAN)
    };
    let mut axes: Vec<Axis> = idx
        .sigma_orders()
        .into_iter()
        .map(|(p, order)| Axis {
            index: p.index(),
            order,
            step: opts.sigma_step,
        })
        .collect();
    for (k, &e) in SLOT_EXPONENTS[slot].iter().enumerate() {
        if e > 0 {
            axes.push(Axis {
                index: 7 + k,
                order: e,
                step: opts.cut_step,
            });
        }
    }
    let c = taylor_coefficient(f, &[0.0; 10], &axes, opts.half_width)?;
    Ok(c * idx.factorial())
}

pub fn audit_table(table: &ExpansionTable, opts: &AuditOptions) -> Result<AuditReport> {
    let jobs: Vec<(MultiIndex, usize, Ratio)> = table
        .iter()
        .flat_map(|(idx, poly)| (0..10).map(move |s| (*idx, s, poly.coeffs[s])))
        .collect();
    let entries = jobs
        .par_iter()
        .map(|&(index, slot, table)| {
            let fd = fd_coefficient(index, slot, opts)?;
            let t = table.to_f64();
            let pass = if table.num == 0 {
                fd.abs() <= opts.abs_tol
            } else {
                (fd - t).abs() <= opts.rel_tol * t.abs()
            };
            Ok(AuditEntry {
                index,
                slot: SLOT_NAMES[slot],
                table,
                finite_difference: fd,
                pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditReport {
        options: *opts,
        entries,
    })
}

/// Canonical JSON dump of the table with its errata.
pub fn coefficients_json() -> String {
    let printed = ExpansionTable::printed();
    let mut polys = serde_json::Map::new();
    for (idx, poly) in printed.iter() {
        polys.insert(
            idx.to_string(),
            serde_json::to_value(poly).expect("serializable"),
        );
    }
    let doc = serde_json::json!({
        "variables": ["q-1/2", "p-1/2", "theta"],
        "slots": SLOT_NAMES,
        "convention": "RC ~ sum over multi-indices of w_alpha * p_alpha; w = 1 for the base, sigma_a for first order, sigma_a*sigma_b for a != b and sigma_a^2/2 for a == b",
        "printed": polys,
        "errata": ERRATA,
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("serializable");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn table_shape() {
        let t = ExpansionTable::printed();
        assert_eq!(t.iter().count(), 1 + 7 + 28);
        let consts: Vec<f64> = Param::ALL
            .iter()
            .map(|&p| t.get(MultiIndex::First(p)).unwrap().values()[0])
            .collect();
        assert_eq!(
            consts,
            vec![-8.0, -8.0, 8.0, 4.0 / 3.0, -4.0 / 3.0, -32.0, -32.0]
        );
        for e in ERRATA {
            assert_eq!(t.get(e.index).unwrap().coeffs[e.slot], e.printed);
        }
    }

    #[test]
    fn coefficient_examples() {
        let c = coefficient(&[A1]).unwrap();
        assert_eq!(c.poly, FIRST[0].1);
        assert!(!c.unlisted);
        let c = coefficient(&[WL, ET]).unwrap();
        assert_eq!(
            &c.poly.coeffs[..4],
            &[r(-16, 1), r(32, 3), r(32, 3), r(-4, 9)]
        );
        let c = coefficient(&[ET, ET]).unwrap();
        assert_eq!(c.poly.coeffs[4], r(244, 9));
        assert_eq!(c.corrected_slots, vec![8]);
        assert!(coefficient(&[A1, A2, A3]).is_err());
    }

    #[test]
    fn multi_index_parsing() {
        assert_eq!(
            "a1*A_WL".parse::<MultiIndex>().unwrap(),
            MultiIndex::Second(A1, WL)
        );
        assert_eq!(
            "A_WL,a1".parse::<MultiIndex>().unwrap(),
            MultiIndex::Second(A1, WL)
        );
        assert_eq!("1".parse::<MultiIndex>().unwrap(), MultiIndex::Base);
        assert_eq!(MultiIndex::all().len(), 36);
    }

    #[test]
    fn quadratic_approx_examples() {
        let z = DomainParams::zero();
        assert_eq!(rc_quadratic_approx(&z, &CutParams::CENTER), 8.0);
        assert!(close(
            rc_quadratic_approx(&z, &CutParams::new(0.5, 0.5, 0.2)),
            8.0 + 7.0 / 18.0 * 0.04,
            1e-12
        ));
        let a = z.with(A1, 0.1);
        assert!(close(
            rc_quadratic_approx(&a, &CutParams::CENTER),
            8.0 - 0.8 + 0.1,
            1e-12
        ));
    }

    #[test]
    fn jacobians() {
        let j = jacobian_base();
        assert_eq!(j[0], [r(48, 1), r(-16, 1), r(4, 3)]);
        assert_eq!(j[2][2], r(7, 9));
        let js = jacobian_sigma(&DomainParams::zero().with(A1, 0.1));
        assert!(close(js[0][0], -11.2, 1e-12));
        assert!(close(js[0][1], 8.0, 1e-12));
        assert!(close(js[2][2], -1.0 / 18.0, 1e-12));
        assert_eq!(jacobian_sigma(&DomainParams::zero()), [[0.0; 3]; 3]);
        assert_eq!(rhs_l(&DomainParams::zero()), [0.0; 3]);
        let l = rhs_l(&DomainParams::zero().with(A2, 0.1));
        let want = [0.8 - 0.16, -0.8 + 0.16, 1.0 / 15.0 - 0.02 / 3.0];
        for i in 0..3 {
            assert!(close(l[i], want[i], 1e-12), "{i}: {} vs {}", l[i], want[i]);
        }
    }

    #[test]
    fn first_order_predictor_matches_closed_form() {
        let t = ExpansionTable::corrected();
        for p in Param::ALL {
            let s = DomainParams::zero().with(p, 0.01);
            let c = t.predict(&s, Order::First).unwrap();
            let v = first_order_offset(&s);
            let got = c.offset();
            for i in 0..3 {
                assert!(
                    close(got[i], v[i], 1e-13),
                    "{p} slot {i}: {} vs {}",
                    got[i],
                    v[i]
                );
            }
        }
        let c = predict_cut(&DomainParams::zero().with(A2, 0.1), Order::First).unwrap();
        assert!(close(c.q, 0.5 + 0.1 / 12.0, 1e-13));
        assert!(close(c.p, 0.5 - 0.1 / 6.0, 1e-13));
        assert!(close(c.theta, 0.1, 1e-13));
        let c = predict_cut(&DomainParams::zero().with(WL, 0.05), Order::First).unwrap();
        assert!(close(c.q, 0.45, 1e-13) && close(c.p, 0.45, 1e-13) && c.theta.abs() < 1e-14);
        assert_eq!(
            predict_cut(&DomainParams::zero(), Order::Full).unwrap(),
            CutParams::CENTER
        );
    }

    #[test]
    fn symmetric_sigma_predicts_symmetric_cut() {
        let s = DomainParams::from_array([0.07, 0.07, 0.0, 0.04, -0.04, 0.02, 0.02]);
        for order in [Order::First, Order::Full] {
            let c = predict_cut(&s, order).unwrap();
            assert!(close(c.q, c.p, 1e-13));
            assert!(c.theta.abs() < 1e-13);
        }
    }

    #[test]
    fn curvature_examples() {
        assert!(close(
            curvature_from_arc(0.0, 0.0, 0.0, 0.1, 0.0).0,
            -0.05,
            1e-15
        ));
        assert!(close(
            curvature_from_arc(0.0, 0.0, 0.0, 0.0, 0.1).1,
            0.05,
            1e-15
        ));
        assert!(close(
            curvature_from_arc(0.2, 0.0, 0.0, 0.1, 0.0).0,
            -0.052,
            1e-15
        ));
    }

    #[test]
    fn gap_vanishes_without_curvature() {
        let g = parabolic_circular_gap(0.05, 0.0, 0.0, 0.0, 0.0, &CutParams::CENTER);
        // zero opening angles give identical domains
        let g = g.unwrap();
        for r in &g.reports {
            assert_eq!(r.rc_gap, 0.0);
            assert_eq!(r.total_area_gap, 0.0);
        }
    }

    #[test]
    fn gap_is_cubic() {
        let g = parabolic_circular_gap(0.0, 0.0, 0.0, 0.2, 0.0, &CutParams::CENTER).unwrap();
        let ratio = g.reports[0].total_area_gap / g.reports[1].total_area_gap;
        assert!((ratio - 8.0).abs() < 0.2, "{ratio}");
        assert!(g.rc_exponent > 2.7 && g.total_area_exponent > 2.7);
        let g = parabolic_circular_gap(0.1, 0.0, 0.0, 0.2, 0.0, &CutParams::CENTER).unwrap();
        assert!(g.reports[0].curve_gap_top < 1e-3);
    }

    #[test]
    fn json_round_trips_rationals() {
        let s = coefficients_json();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["printed"]["a1"][9], "-5/18");
        assert_eq!(v["errata"].as_array().unwrap().len(), 5);
    }
}
