use super::Matrix;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `PA = LU`, packed in one matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors `a`, failing with [`Error::Singular`] when a pivot falls below
    /// `pivot_tol` in absolute value.
    pub fn factor(a: &Matrix, pivot_tol: f64) -> Result<Self> {
        let n = a.rows();
        a.check_shape((n, n))?;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax < pivot_tol || pmax == 0.0 {
                return Err(Error::Singular(pmax));
            }
            if p != k {
                let (a, b) = lu.two_rows_mut(p, k);
                a.swap_with_slice(b);
                perm.swap(p, k);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == 0.0 {
                    continue;
                }
                let (rk, ri) = lu.two_rows_mut(k, i);
                for (x, &y) in ri[k + 1..].iter_mut().zip(&rk[k + 1..]) {
                    *x -= f * y;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    /// Solves `AX = B` for every column of `b`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(Error::ShapeMismatch {
                expected: (n, b.cols()),
                found: b.shape(),
            });
        }
        let mut x = Matrix::from_fn(n, b.cols(), |i, j| b[(self.perm[i], j)]);
        for i in 0..n {
            for k in 0..i {
                let f = self.lu[(i, k)];
                if f != 0.0 {
                    let (rk, ri) = x.two_rows_mut(k, i);
                    for (a, &b) in ri.iter_mut().zip(rk.iter()) {
                        *a -= f * b;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let f = self.lu[(i, k)];
                if f != 0.0 {
                    let (rk, ri) = x.two_rows_mut(k, i);
                    for (a, &b) in ri.iter_mut().zip(rk.iter()) {
                        *a -= f * b;
                    }
                }
            }
            let d = self.lu[(i, i)];
            for a in x.row_mut(i) {
                *a /= d;
            }
        }
        Ok(x)
    }
}

pub fn lu_solve(a: &Matrix, b: &Matrix, pivot_tol: f64) -> Result<Matrix> {
    Lu::factor(a, pivot_tol)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let a = Matrix::from_rows(&[[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]]);
        let x = Matrix::from_rows(&[[1.0], [-2.0], [0.5]]);
        let b = a.matmul(&x);
        let got = lu_solve(&a, &b, 1e-12).unwrap();
        assert!((&got - &x).max_abs() < 1e-14);
    }

    #[test]
    fn singular() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(lu_solve(&a, &Matrix::identity(2), 1e-12), Err(Error::Singular(_))));
    }
}
