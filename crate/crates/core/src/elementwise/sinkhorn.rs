use crate::dense::Matrix;
use crate::error::{Error, Result};

pub const SINKHORN_TOL: f64 = 1e-12;
pub const SINKHORN_MAX_ITERS: usize = 10_000;

/// A positive 2×2 block `[[a, b], [c, d]]` with target row sums `p` and
/// column sums `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sinkhorn2x2Input {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub p: (f64, f64),
    pub q: (f64, f64),
}

/// Balances a positive 2×2 block in closed form.
///
/// The balanced block is `diag(r)·[[a, b], [c, d]]·diag(κ, 1)` up to scaling,
/// with `κ` the positive root of
/// `q₂ac·κ² + ((bc + ad)q₂ − bc·p₁ − ad·p₂)·κ − bd·q₁ = 0`.
pub fn sinkhorn_2x2(input: &Sinkhorn2x2Input) -> Result<[[f64; 2]; 2]> {
    let Sinkhorn2x2Input { a, b, c, d, p, q } = *input;
    for (k, v) in [a, b, c, d].into_iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositive {
                i: k / 2,
                j: k % 2,
                value: v,
            });
        }
    }
    if !(p.0 > 0.0 && p.1 > 0.0 && q.0 > 0.0 && q.1 > 0.0) {
        return Err(Error::NoPositiveRoot);
    }
    let kappa = positive_root(
        q.1 * a * c,
        (b * c + a * d) * q.1 - b * c * p.0 - a * d * p.1,
        -b * d * q.0,
    )?;
    let c12 = p.0 / (kappa * a + b);
    let c22 = p.1 / (kappa * c + d);
    Ok([[kappa * c12 * a, c12 * b], [kappa * c22 * c, c22 * d]])
}

/// The positive root of `A·κ² + B·κ + C` with `A > 0`, `C < 0`.
fn positive_root(qa: f64, qb: f64, qc: f64) -> Result<f64> {
    if qa == 0.0 {
        let k = -qc / qb;
        return if k > 0.0 && k.is_finite() {
            Ok(k)
        } else {
            Err(Error::NoPositiveRoot)
        };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if !(disc >= 0.0) {
        return Err(Error::NoPositiveRoot);
    }
    let w = -0.5 * (qb + qb.signum() * disc.sqrt());
    let (r1, r2) = (w / qa, qc / w);
    [r1, r2]
        .into_iter()
        .find(|r| *r > 0.0 && r.is_finite())
        .ok_or(Error::NoPositiveRoot)
}

/// Alternating row and column normalization of a positive matrix until the
/// row sums match `mu` and the column sums match `nu` within `tol`.
pub fn full_sinkhorn(u: &Matrix, mu: &[f64], nu: &[f64], tol: f64, max_iters: usize) -> Result<Matrix> {
    let (m, n) = u.shape();
    if mu.len() != m || nu.len() != n {
        return Err(Error::ShapeMismatch {
            expected: (m, n),
            found: (mu.len(), nu.len()),
        });
    }
    for i in 0..m {
        for j in 0..n {
            if !(u[(i, j)] > 0.0) {
                return Err(Error::NonPositive { i, j, value: u[(i, j)] });
            }
        }
    }
    let mut x = u.clone();
    let mut err = marginal_error(&x, mu, nu);
    let mut iters = 0;
    while err > tol {
        if iters == max_iters {
            return Err(Error::SinkhornDiverged {
                iterations: iters,
                error: err,
            });
        }
        for (i, rs) in x.row_sums().into_iter().enumerate() {
            let s = mu[i] / rs;
            for v in x.row_mut(i) {
                *v *= s;
            }
        }
        let scale: Vec<f64> = x.col_sums().iter().zip(nu).map(|(cs, t)| t / cs).collect();
        for i in 0..m {
            for (v, s) in x.row_mut(i).iter_mut().zip(&scale) {
                *v *= s;
            }
        }
        iters += 1;
        err = marginal_error(&x, mu, nu);
    }
    Ok(x)
}

/// Largest absolute deviation of the row and column sums from their targets.
pub fn marginal_error(x: &Matrix, mu: &[f64], nu: &[f64]) -> f64 {
    let rows = x.row_sums().iter().zip(mu).map(|(s, t)| (s - t).abs()).fold(0.0, f64::max);
    let cols = x.col_sums().iter().zip(nu).map(|(s, t)| (s - t).abs()).fold(0.0, f64::max);
    rows.max(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_block() {
        let out = sinkhorn_2x2(&Sinkhorn2x2Input {
            a: 1.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            p: (0.5, 0.5),
            q: (0.5, 0.5),
        })
        .unwrap();
        assert_eq!(out, [[0.25; 2]; 2]);
    }

    #[test]
    fn balanced_block_is_fixed() {
        let (a, b, c, d) = (0.1, 0.3, 0.4, 0.2);
        let out = sinkhorn_2x2(&Sinkhorn2x2Input {
            a,
            b,
            c,
            d,
            p: (a + b, c + d),
            q: (a + c, b + d),
        })
        .unwrap();
        for (x, y) in out.iter().flatten().zip([a, b, c, d]) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_positive() {
        let bad = Sinkhorn2x2Input {
            a: 0.0,
            b: 1.0,
            c: 1.0,
            d: 1.0,
            p: (1.0, 1.0),
            q: (1.0, 1.0),
        };
        assert!(sinkhorn_2x2(&bad).is_err());
    }

    #[test]
    fn product_coupling_is_balanced() {
        let mu = [0.2, 0.3, 0.5];
        let nu = [0.6, 0.4];
        let u = Matrix::from_fn(3, 2, |i, j| mu[i] * nu[j]);
        let x = full_sinkhorn(&u, &mu, &nu, 1e-12, 1).unwrap();
        assert!((&x - &u).max_abs() < 1e-15);
    }
}
