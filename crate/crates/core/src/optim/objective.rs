use crate::dense::{frobenius_inner, Matrix};

/// A smooth function on the ambient space.
pub trait Objective: Send + Sync {
    fn value(&self, x: &Matrix) -> f64;

    /// Euclidean gradient `∇f(x)`.
    fn gradient(&self, x: &Matrix) -> Matrix;

    /// Cost `F` of one call to [`Objective::gradient`] under the flop model.
    fn gradient_flops(&self) -> u64;
}

/// `f(X) = ⟨C, X⟩`. The gradient is the constant `C` and costs nothing.
#[derive(Clone, Debug)]
pub struct LinearObjective {
    pub c: Matrix,
}

impl LinearObjective {
    pub fn new(c: Matrix) -> Self {
        Self { c }
    }
}

impl Objective for LinearObjective {
    fn value(&self, x: &Matrix) -> f64 {
        frobenius_inner(&self.c, x).expect("shape checked by the optimizer")
    }

    fn gradient(&self, _x: &Matrix) -> Matrix {
        self.c.clone()
    }

    fn gradient_flops(&self) -> u64 {
        0
    }
}

/// `f(X) = ½‖X − T‖²`.
#[derive(Clone, Debug)]
pub struct QuadraticObjective {
    pub target: Matrix,
}

impl Objective for QuadraticObjective {
    fn value(&self, x: &Matrix) -> f64 {
        0.5 * (x - &self.target).frobenius_norm().powi(2)
    }

    fn gradient(&self, x: &Matrix) -> Matrix {
        x - &self.target
    }

    fn gradient_flops(&self) -> u64 {
        let (r, c) = self.target.shape();
        (r * c) as u64
    }
}
