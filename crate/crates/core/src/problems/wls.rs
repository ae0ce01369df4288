use crate::dense::{dot, Matrix};
use crate::optim::Objective;
use crate::rng::Rng;

/// `f(Y) = ‖A ⊙ (YYᵀ) − B‖²` with a symmetric 0/1 mask `A` and `B = A ⊙ X*`.
///
/// Only masked entries are formed, so the oracle cost scales with the mask density.
#[derive(Clone, Debug)]
pub struct WeightedLs {
    pub mask: Matrix,
    pub b: Matrix,
    pub x_star: Matrix,
    pub y_star: Matrix,
    /// Masked columns of each row.
    support: Vec<Vec<usize>>,
}

impl WeightedLs {
    /// `Y* = U·diag(σ)·Vᵀ` with Haar `U`, `V` and `σ_k² = 2^{−k}`; the mask
    /// keeps each upper-triangular entry with probability `density` and is
    /// mirrored. `density = 1` gives the all-ones mask.
    pub fn generate(n: usize, p: usize, density: f64, seed: u64) -> Self {
        let mut rng = Rng::derived(seed, 0x3715);
        let u = rng.stiefel(n, p);
        let v = rng.orthogonal(p);
        let sigma: Vec<f64> = (0..p).map(|k| 0.5f64.powf(k as f64 / 2.0)).collect();
        let us = Matrix::from_fn(n, p, |r, c| u[(r, c)] * sigma[c]);
        let y_star = us.matmul_t(&v);
        let mut mask = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                if density >= 1.0 || rng.bernoulli(density) {
                    mask[(i, j)] = 1.0;
                    mask[(j, i)] = 1.0;
                }
            }
        }
        Self::new(mask, y_star)
    }

    pub fn new(mask: Matrix, y_star: Matrix) -> Self {
        let x_star = y_star.matmul_t(&y_star);
        let b = mask.hadamard(&x_star);
        let support = (0..mask.rows())
            .map(|i| (0..mask.cols()).filter(|&j| mask[(i, j)] != 0.0).collect())
            .collect();
        Self {
            mask,
            b,
            x_star,
            y_star,
            support,
        }
    }

    pub fn density(&self) -> f64 {
        let nnz: usize = self.support.iter().map(Vec::len).sum();
        nnz as f64 / (self.mask.rows() * self.mask.cols()) as f64
    }

    /// `‖YYᵀ − X*‖ / ‖X*‖`.
    pub fn recovery_error(&self, y: &Matrix) -> f64 {
        (&y.matmul_t(y) - &self.x_star).frobenius_norm() / self.x_star.frobenius_norm()
    }

    fn residual(&self, y: &Matrix, i: usize, j: usize) -> f64 {
        dot(y.row(i), y.row(j)) - self.b[(i, j)]
    }
}

impl Objective for WeightedLs {
    fn value(&self, y: &Matrix) -> f64 {
        let mut total = 0.0;
        for (i, cols) in self.support.iter().enumerate() {
            for &j in cols {
                total += self.residual(y, i, j).powi(2);
            }
        }
        total
    }

    /// `4RY` with `R = A ⊙ (YYᵀ − B)`.
    fn gradient(&self, y: &Matrix) -> Matrix {
        let mut g = Matrix::zeros(y.rows(), y.cols());
        for (i, cols) in self.support.iter().enumerate() {
            for &j in cols.iter().filter(|&&j| j >= i) {
                let r = 4.0 * self.residual(y, i, j);
                for (gc, yc) in g.row_mut(i).iter_mut().zip(y.row(j)) {
                    *gc += r * yc;
                }
                if j != i {
                    for (gc, yc) in g.row_mut(j).iter_mut().zip(y.row(i)) {
                        *gc += r * yc;
                    }
                }
            }
        }
        g
    }

    fn gradient_flops(&self) -> u64 {
        let p = self.y_star.cols() as u64;
        let nnz: u64 = self.support.iter().map(|c| c.len() as u64).sum();
        let diag = (0..self.mask.rows()).filter(|&i| self.mask[(i, i)] != 0.0).count() as u64;
        let upper = (nnz + diag) / 2;
        upper * (2 * p + 1) + nnz * 2 * p
    }
}
