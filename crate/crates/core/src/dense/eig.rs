use super::{dot, Matrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;
const OFF_TOL: f64 = 1e-13;

/// Symmetric eigendecomposition by cyclic two-sided Jacobi.
///
/// Returns `(V, λ)` with `λ` ascending and the eigenvectors in the columns of `V`.
pub fn sym_eig(a: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let n = a.rows();
    a.check_shape((n, n))?;
    let scale = a.frobenius_norm();
    let asym = (a - &a.transpose()).max_abs();
    if asym > 1e-12 * scale.max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let mut m = a.sym();
    let mut v = Matrix::identity(n);
    let off = |m: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off(&m) <= OFF_TOL * scale;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // M ← JᵀMJ with J the rotation in the (p, q) plane.
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                let (rp, rq) = m.two_rows_mut(p, q);
                for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        converged = off(&m) <= OFF_TOL * scale;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[(x, x)].total_cmp(&m[(y, y)]));
    let lambda = order.iter().map(|&k| m[(k, k)]).collect();
    let vs = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok((vs, lambda))
}

/// Thin SVD by one-sided Jacobi, `A = U·diag(σ)·Vᵀ` with `σ` descending.
///
/// Columns belonging to zero singular values are completed with the leading
/// identity columns that are not already spanned.
pub fn thin_svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    if a.rows() < a.cols() {
        let (u, s, v) = thin_svd(&a.transpose());
        return (v, s, u);
    }
    let (m, n) = a.shape();
    // Rows of `w` are the columns of A, rows of `vt` the columns of V.
    let mut w = a.transpose();
    let mut vt = Matrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = dot(w.row(i), w.row(i));
                let beta = dot(w.row(j), w.row(j));
                let gamma = dot(w.row(i), w.row(j));
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut vt] {
                    let (ri, rj) = mat.two_rows_mut(i, j);
                    for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
                        let (p, q) = (*x, *y);
                        *x = c * p - s * q;
                        *y = s * p + c * q;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n).map(|k| dot(w.row(k), w.row(k)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma_max = norms.iter().cloned().fold(0.0, f64::max);
    let zero_tol = sigma_max * (m.max(n) as f64) * f64::EPSILON;

    let mut ut = Matrix::zeros(n, m);
    let mut sigma = vec![0.0; n];
    let mut missing = Vec::new();
    for (col, &k) in order.iter().enumerate() {
        if norms[k] > zero_tol && norms[k] > 0.0 {
            sigma[col] = norms[k];
            for (dst, &src) in ut.row_mut(col).iter_mut().zip(w.row(k)) {
                *dst = src / norms[k];
            }
        } else {
            missing.push(col);
        }
    }
    let filled: Vec<usize> = (0..n).filter(|c| !missing.contains(c)).collect();
    complete_orthonormal(&mut ut, &filled, &missing);
    let v = Matrix::from_fn(n, n, |i, j| vt[(order[j], i)]);
    (ut.transpose(), sigma, v)
}

/// Fills the rows `missing` of `qt` with unit vectors orthogonal to every
/// already-set row, trying `e_0, e_1, …` in turn.
fn complete_orthonormal(qt: &mut Matrix, filled: &[usize], missing: &[usize]) {
    let m = qt.cols();
    let mut basis: Vec<usize> = filled.to_vec();
    let mut candidate = 0;
    for &row in missing {
        while candidate < m {
            let mut e = vec![0.0; m];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for &b in &basis {
                    let proj = dot(&e, qt.row(b));
                    for (x, y) in e.iter_mut().zip(qt.row(b)) {
                        *x -= proj * y;
                    }
                }
            }
            let norm = dot(&e, &e).sqrt();
            if norm > 0.5 {
                for (dst, x) in qt.row_mut(row).iter_mut().zip(&e) {
                    *dst = x / norm;
                }
                basis.push(row);
                break;
            }
        }
    }
}

/// Solves `AW + WA = R` for symmetric positive definite `A` via its eigenbasis.
pub fn solve_sym_lyapunov(a: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let (v, lambda) = sym_eig(a)?;
    let n = a.rows();
    rhs.check_shape((n, n))?;
    let r = v.t_matmul(&rhs.matmul(&v));
    let scale = lambda.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let d = lambda[i] + lambda[j];
            if d.abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::SingularLyapunov(d));
            }
            w[(i, j)] = r[(i, j)] / d;
        }
    }
    Ok(v.matmul(&w).matmul_t(&v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let (v, l) = sym_eig(&Matrix::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(l, vec![1.0, 2.0, 3.0]);
        assert_eq!(v[(1, 0)].abs(), 1.0);
        assert_eq!(v[(2, 1)].abs(), 1.0);
        assert_eq!(v[(0, 2)].abs(), 1.0);
    }

    #[test]
    fn rejects_asymmetric() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
        assert!(matches!(sym_eig(&a), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn svd_of_diagonal_and_zero() {
        let (u, s, v) = thin_svd(&Matrix::diag(&[5.0, 2.0]));
        assert_eq!(s, vec![5.0, 2.0]);
        assert!(u.bit_eq(&Matrix::identity(2)));
        assert!(v.bit_eq(&Matrix::identity(2)));

        let (u, s, v) = thin_svd(&Matrix::zeros(3, 2));
        assert_eq!(s, vec![0.0, 0.0]);
        assert!(u.bit_eq(&Matrix::eye(3, 2)));
        assert!(v.bit_eq(&Matrix::identity(2)));
    }

    #[test]
    fn lyapunov_residual() {
        let a = Matrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]);
        let r = Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]);
        let w = solve_sym_lyapunov(&a, &r).unwrap();
        let res = &(&a.matmul(&w) + &w.matmul(&a)) - &r;
        assert!(res.max_abs() < 1e-14);
    }
}
