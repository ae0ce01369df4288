use super::Matrix;
use crate::error::{Error, Result};

/// Householder thin QR, `A = QR` with `Q` of size m×n and `R` upper triangular.
///
/// The diagonal of `R` is made non-negative, which fixes `Q` uniquely for
/// full-rank input. Fails when some `|r_kk| < 1e-12·‖A‖_F`.
pub fn thin_qr(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::InvalidArgument(format!(
            "thin_qr needs rows >= cols, got {m}x{n}"
        )));
    }
    let tol = 1e-12 * a.frobenius_norm();
    // Work on the transpose so each column of A is a contiguous row.
    let mut w = a.transpose();
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut r = Matrix::zeros(n, n);

    for k in 0..n {
        let col = &w.row(k)[k..];
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        let alpha = if col[0] >= 0.0 { -norm } else { norm };
        let mut v = col.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if norm <= tol {
            return Err(Error::RankDeficient { column: k, pivot: norm });
        }
        r[(k, k)] = alpha;
        for c in k + 1..n {
            let row = &mut w.row_mut(c)[k..];
            let proj = 2.0 * super::dot(&v, row) / vnorm2;
            for (x, vi) in row.iter_mut().zip(&v) {
                *x -= proj * vi;
            }
            r[(k, c)] = row[0];
        }
        vs.push(v);
    }

    // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of I_m, built in
    // transposed form (row c of `qt` is column c of Q).
    let mut qt = Matrix::eye(n, m);
    for k in (0..n).rev() {
        let v = &vs[k];
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for c in 0..n {
            let row = &mut qt.row_mut(c)[k..];
            let proj = 2.0 * super::dot(v, row) / vnorm2;
            for (x, vi) in row.iter_mut().zip(v) {
                *x -= proj * vi;
            }
        }
    }

    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for c in k..n {
                r[(k, c)] = -r[(k, c)];
            }
            for x in qt.row_mut(k) {
                *x = -*x;
            }
        }
    }
    Ok((qt.transpose(), r))
}
