use crate::dense::Matrix;
use crate::optim::Objective;
use crate::rng::Rng;

/// `f(X) = ‖X − A‖²` on `Sp(n, p)`.
#[derive(Clone, Debug)]
pub struct NearestSymplectic {
    pub a: Matrix,
}

impl NearestSymplectic {
    /// `A` is a standard Gaussian `2n×2p` matrix.
    pub fn generate(n: usize, p: usize, seed: u64) -> Self {
        let mut rng = Rng::derived(seed, 0x5EC7);
        Self {
            a: rng.gaussian(2 * n, 2 * p),
        }
    }
}

impl Objective for NearestSymplectic {
    fn value(&self, x: &Matrix) -> f64 {
        (x - &self.a).frobenius_norm().powi(2)
    }

    fn gradient(&self, x: &Matrix) -> Matrix {
        (x - &self.a).scale(2.0)
    }

    fn gradient_flops(&self) -> u64 {
        2 * (self.a.rows() * self.a.cols()) as u64
    }
}
