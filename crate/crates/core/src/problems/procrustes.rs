use crate::dense::{frobenius_inner, thin_svd, Matrix};
use crate::optim::Objective;
use crate::rng::Rng;

/// `min ‖XA − B‖²` over `St(n, p)` in the equivalent linear form
/// `f(X) = −⟨XA, B⟩ = ⟨X, −BAᵀ⟩`.
#[derive(Clone, Debug)]
pub struct Procrustes {
    pub a: Matrix,
    pub b: Matrix,
    /// The constant gradient `−BAᵀ`.
    grad: Matrix,
}

impl Procrustes {
    pub fn new(a: Matrix, b: Matrix) -> Self {
        let grad = b.matmul_t(&a).scale(-1.0);
        Self { a, b, grad }
    }

    /// `A` is `p×p` and `B` is `n×p`, both standard Gaussian.
    pub fn generate(n: usize, p: usize, seed: u64) -> Self {
        let mut rng = Rng::derived(seed, 0x9A0C);
        let a = rng.gaussian(p, p);
        let b = rng.gaussian(n, p);
        Self::new(a, b)
    }

    /// The optimum `UVᵀ` for `BAᵀ = UΣVᵀ`.
    pub fn minimizer(&self) -> Matrix {
        let (u, _, v) = thin_svd(&self.b.matmul_t(&self.a));
        u.matmul_t(&v)
    }

    /// `f* = −⟨UVᵀA, B⟩`.
    pub fn f_star(&self) -> f64 {
        self.value(&self.minimizer())
    }
}

impl Objective for Procrustes {
    fn value(&self, x: &Matrix) -> f64 {
        frobenius_inner(&self.grad, x).expect("iterate has the problem shape")
    }

    fn gradient(&self, _x: &Matrix) -> Matrix {
        self.grad.clone()
    }

    fn gradient_flops(&self) -> u64 {
        0
    }
}
