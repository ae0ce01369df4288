use crate::dense::{sym_eig, Matrix};
use crate::error::Result;
use crate::optim::Objective;
use crate::rng::Rng;

/// `f(X) = −tr(XᵀAX)` on `St(n, p)`.
#[derive(Clone, Debug)]
pub struct Pca {
    pub a: Matrix,
    /// Eigenvalues of `A` in descending order.
    pub spectrum: Vec<f64>,
    /// Top-`p` eigenvectors of `A` from [`sym_eig`].
    pub reference: Matrix,
}

impl Pca {
    /// `A = QΛQᵀ` with Haar `Q` and the geometric spectrum
    /// `λ_i = cond^{−(i−1)/(n−1)}`, so that `λ₁/λ_n = cond`.
    pub fn generate(n: usize, p: usize, cond: f64, seed: u64) -> Result<Self> {
        let mut rng = Rng::derived(seed, 0x9CA);
        let q = rng.orthogonal(n);
        let spectrum: Vec<f64> = (0..n)
            .map(|i| cond.powf(-(i as f64) / (n - 1).max(1) as f64))
            .collect();
        let ql = Matrix::from_fn(n, n, |r, c| q[(r, c)] * spectrum[c]);
        let a = ql.matmul_t(&q).sym();
        Self::from_matrix(a, p)
    }

    pub fn from_matrix(a: Matrix, p: usize) -> Result<Self> {
        let n = a.rows();
        let (v, mut lambda) = sym_eig(&a)?;
        let reference = Matrix::from_fn(n, p, |r, c| v[(r, n - 1 - c)]);
        lambda.reverse();
        Ok(Self {
            a,
            spectrum: lambda,
            reference,
        })
    }

    /// `−Σ_{i≤p} λ_i`.
    pub fn f_star(&self) -> f64 {
        -self.spectrum[..self.reference.cols()].iter().sum::<f64>()
    }
}

impl Objective for Pca {
    fn value(&self, x: &Matrix) -> f64 {
        -x.t_matmul(&self.a.matmul(x)).trace()
    }

    fn gradient(&self, x: &Matrix) -> Matrix {
        self.a.matmul(x).scale(-2.0)
    }

    fn gradient_flops(&self) -> u64 {
        let (n, p) = (self.a.rows() as u64, self.reference.cols() as u64);
        2 * n * n * p + n * p
    }
}
