//! Central differences with one Richardson step, and tensor-product
//! stencils for Taylor coefficients of several variables.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Step for gradients.
pub const GRAD_STEP: f64 = 1e-5;
/// Step for Hessians; second differences need a wider stencil to stay above round-off.
pub const HESS_STEP: f64 = 1e-3;

pub fn gradient3<F>(f: F, x: [f64; 3], h: f64) -> Result<[f64; 3]>
where
    F: Fn([f64; 3]) -> Result<f64>,
{
    let mut g = [0.0; 3];
    for (i, gi) in g.iter_mut().enumerate() {
        let d = |h: f64| -> Result<f64> {
            let (mut a, mut b) = (x, x);
            a[i] += h;
            b[i] -= h;
            Ok((f(a)? - f(b)?) / (2.0 * h))
        };
        let (d1, d2) = (d(h)?, d(0.5 * h)?);
        *gi = (4.0 * d2 - d1) / 3.0;
    }
    Ok(g)
}

pub fn hessian3<F>(f: F, x: [f64; 3], h: f64) -> Result<[[f64; 3]; 3]>
where
    F: Fn([f64; 3]) -> Result<f64>,
{
    let f0 = f(x)?;
    let at = |i: usize, si: f64, j: usize, sj: f64| -> Result<f64> {
        let mut y = x;
        y[i] += si;
        y[j] += sj;
        f(y)
    };
    let mut hm = [[0.0; 3]; 3];
    for i in 0..3 {
        let d = |h: f64| -> Result<f64> {
            let mut a = x;
            let mut b = x;
            a[i] += h;
            b[i] -= h;
            Ok((f(a)? - 2.0 * f0 + f(b)?) / (h * h))
        };
        hm[i][i] = (4.0 * d(0.5 * h)? - d(h)?) / 3.0;
        for j in 0..i {
            let d = |h: f64| -> Result<f64> {
                Ok(
                    (at(i, h, j, h)? - at(i, h, j, -h)? - at(i, -h, j, h)? + at(i, -h, j, -h)?)
                        / (4.0 * h * h),
                )
            };
            let v = (4.0 * d(0.5 * h)? - d(h)?) / 3.0;
            hm[i][j] = v;
            hm[j][i] = v;
        }
    }
    Ok(hm)
}

/// Weights `w_j`, `j = −m..=m`, with `Σ w_j f(j)` equal to the coefficient of
/// `x^k` in the degree-2m interpolant of `f` at the integer nodes.
pub fn taylor_weights(m: usize, k: usize) -> Result<Vec<f64>> {
    let n = 2 * m + 1;
    if k >= n {
        return Err(Error::Invalid(format!(
            "order {k} needs more than {n} nodes"
        )));
    }
    let v = DMatrix::from_fn(n, n, |row, col| {
        let node = row as f64 - m as f64;
        node.powi(col as i32)
    });
    let inv = v
        .try_inverse()
        .ok_or_else(|| Error::Singular("vandermonde".into()))?;
    Ok((0..n).map(|j| inv[(k, j)]).collect())
}

/// One axis of a tensor-product stencil.
#[derive(Clone, Copy, Debug)]
pub struct Axis {
    pub index: usize,
    pub order: usize,
    pub step: f64,
}

/// Taylor coefficient of `Π x_a^{order_a}` of `f` around `x0`.
pub fn taylor_coefficient<F>(f: F, x0: &[f64], axes: &[Axis], m: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let weights: Vec<Vec<f64>> = axes
        .iter()
        .map(|a| taylor_weights(m, a.order))
        .collect::<Result<_>>()?;
    let n = 2 * m + 1;
    let total = n.pow(axes.len() as u32);
    let mut x = x0.to_vec();
    let mut sum = 0.0;
    'outer: for flat in 0..total {
        let mut rest = flat;
        let mut w = 1.0;
        x.copy_from_slice(x0);
        for (a, ws) in axes.iter().zip(&weights) {
            let j = rest % n;
            rest /= n;
            if ws[j] == 0.0 {
                continue 'outer;
            }
            w *= ws[j];
            x[a.index] += (j as f64 - m as f64) * a.step;
        }
        sum += w * f(&x);
    }
    let scale: f64 = axes.iter().map(|a| a.step.powi(a.order as i32)).product();
    Ok(sum / scale)
}

/// Least-squares fit of polynomial coefficients (lowest degree first).
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::Dimension {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let a = DMatrix::from_fn(xs.len(), degree + 1, |r, c| xs[r].powi(c as i32));
    let b = DVector::from_column_slice(ys);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Singular(e.to_string()))?;
    Ok(sol.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(x: [f64; 3]) -> Result<f64> {
        Ok(x[0].powi(3) + 2.0 * x[0] * x[1] - x[2] * x[2] * x[1] + x[2].exp())
    }

    #[test]
    fn gradient_and_hessian_of_smooth_function() {
        let x = [0.3, -0.2, 0.1];
        let g = gradient3(cubic, x, GRAD_STEP).unwrap();
        let exact = [
            3.0 * 0.09 + 2.0 * -0.2,
            0.6 - 0.01,
            0.2 * 0.2 + 0.1_f64.exp(),
        ];
        for i in 0..3 {
            assert!(
                (g[i] - exact[i]).abs() < 1e-9,
                "{i}: {} vs {}",
                g[i],
                exact[i]
            );
        }
        let h = hessian3(cubic, x, HESS_STEP).unwrap();
        let he = [
            [1.8, 2.0, 0.0],
            [2.0, 0.0, -0.2],
            [0.0, -0.2, 0.4 + 0.1_f64.exp()],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((h[i][j] - he[i][j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn weights_recover_monomials() {
        for k in 0..5 {
            let w = taylor_weights(4, k).unwrap();
            for deg in 0..9 {
                let s: f64 = w
                    .iter()
                    .enumerate()
                    .map(|(j, wj)| wj * (j as f64 - 4.0).powi(deg))
                    .sum();
                let want = if deg as usize == k { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-9, "k={k} deg={deg} s={s}");
            }
        }
    }

    #[test]
    fn mixed_taylor_coefficient() {
        let f = |x: &[f64]| (x[0] + 2.0 * x[1]).exp();
        // coefficient of x0 * x1^2 in exp(x0 + 2 x1) is 1 * 4/2 = 2
        let axes = [
            Axis {
                index: 0,
                order: 1,
                step: 0.05,
            },
            Axis {
                index: 1,
                order: 2,
                step: 0.05,
            },
        ];
        let c = taylor_coefficient(f, &[0.0, 0.0], &axes, 4).unwrap();
        assert!((c - 2.0).abs() < 1e-7, "{c}");
    }

    #[test]
    fn polyfit_exact_quadratic() {
        let xs: Vec<f64> = (0..33).map(|k| k as f64 / 32.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.3 * x * x - 0.1 * x + 0.7).collect();
        let c = polyfit(&xs, &ys, 2).unwrap();
        assert!(
            (c[0] - 0.7).abs() < 1e-13 && (c[1] + 0.1).abs() < 1e-13 && (c[2] - 0.3).abs() < 1e-13
        );
    }
}
