use super::{orthonormality_residual, qr_retraction_flops, skew_row_derivative, stiefel_projection_flops};
use crate::dense::{frobenius_inner, rotate_pair, thin_qr, Matrix, RotationKind};
use crate::error::Result;
use crate::manifold::{
    check_dims, invalid_index, strict_pair_at, CoordinateIndex, CoordinateStepReport, Family,
    Manifold, ManifoldDescriptor, RetractInfo, Touched,
};
use crate::rng::Rng;

/// Matrices with orthonormal columns, `XᵀX = I_p`.
///
/// The basis is `H_ij X` with `H_ij = e_i e_jᵀ − e_j e_iᵀ`, and moving along it
/// is a Givens rotation of rows `i` and `j`.
#[derive(Clone, Debug)]
pub struct Stiefel {
    n: usize,
    p: usize,
}

impl Stiefel {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        check_dims(Family::Stiefel, p >= 1 && p <= n, "need 1 <= p <= n")?;
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }
}

pub(crate) fn pair_of(family: Family, n: usize, l: CoordinateIndex) -> Result<(usize, usize)> {
    match l {
        CoordinateIndex::Pair(i, j) if i < j && j < n => Ok((i, j)),
        _ => Err(invalid_index(family, l)),
    }
}

/// Givens rotation of rows `(i, j)` by angle `t`; `t = 0` is a no-op.
pub(crate) fn givens_rows(x: &mut Matrix, i: usize, j: usize, t: f64) {
    if t == 0.0 {
        return;
    }
    let (c, s) = RotationKind::Circular.coefficients(t);
    let (ri, rj) = x.two_rows_mut(i, j);
    rotate_pair(ri, rj, c, s, RotationKind::Circular);
}

impl Manifold for Stiefel {
    fn family(&self) -> Family {
        Family::Stiefel
    }

    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor::Stiefel { n: self.n, p: self.p }
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    fn feasibility_residual(&self, x: &Matrix) -> Result<f64> {
        x.check_shape(self.ambient_shape())?;
        Ok(orthonormality_residual(x))
    }

    fn riemannian_gradient(&self, x: &Matrix, g: &Matrix) -> Result<Matrix> {
        x.check_shape(self.ambient_shape())?;
        g.check_shape(self.ambient_shape())?;
        let s = x.t_matmul(g).sym();
        Ok(g - &x.matmul(&s))
    }

    fn basis_size(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn index_at(&self, pos: usize) -> CoordinateIndex {
        let (i, j) = strict_pair_at(self.n, pos);
        CoordinateIndex::Pair(i, j)
    }

    fn check_index(&self, l: CoordinateIndex) -> Result<()> {
        pair_of(Family::Stiefel, self.n, l).map(|_| ())
    }

    fn coordinate_derivative(&self, x: &Matrix, g: &Matrix, l: CoordinateIndex) -> Result<f64> {
        let (i, j) = pair_of(Family::Stiefel, self.n, l)?;
        Ok(skew_row_derivative(x, g, i, j))
    }

    fn coordinate_retract_in_place(
        &self,
        x: &mut Matrix,
        l: CoordinateIndex,
        t: f64,
    ) -> Result<RetractInfo> {
        let (i, j) = pair_of(Family::Stiefel, self.n, l)?;
        if t == 0.0 {
            return Ok(RetractInfo::IDENTITY);
        }
        givens_rows(x, i, j, t);
        Ok(RetractInfo {
            touched: Touched::Rows(i, j),
            clamped: false,
        })
    }

    fn full_retract(&self, x: &Matrix, u: &Matrix, t: f64) -> Result<Matrix> {
        if t == 0.0 {
            return Ok(x.clone());
        }
        let mut y = x.clone();
        y.axpy(t, u);
        Ok(thin_qr(&y)?.0)
    }

    fn derivative_flops(&self, _l: CoordinateIndex) -> u64 {
        4 * self.p as u64
    }

    fn update_flops(&self, _l: CoordinateIndex) -> u64 {
        6 * self.p as u64
    }

    fn scalar_flops(&self, _l: CoordinateIndex) -> u64 {
        18
    }

    fn full_step_flops(&self) -> u64 {
        let (n, p) = (self.n as u64, self.p as u64);
        stiefel_projection_flops(n, p) + qr_retraction_flops(n, p)
    }

    fn rotation_for(&self, l: CoordinateIndex) -> Option<(usize, usize, RotationKind)> {
        match l {
            CoordinateIndex::Pair(i, j) => Some((i, j, RotationKind::Circular)),
            _ => None,
        }
    }

    fn renormalize(&self, x: &mut Matrix) -> Result<()> {
        *x = thin_qr(x)?.0;
        Ok(())
    }

    fn random_point(&self, rng: &mut Rng) -> Matrix {
        rng.stiefel(self.n, self.p)
    }

    fn materialize_basis(&self, x: &Matrix, l: CoordinateIndex) -> Result<Matrix> {
        let (i, j) = pair_of(Family::Stiefel, self.n, l)?;
        let mut b = Matrix::zeros(self.n, self.p);
        b.row_mut(i).copy_from_slice(x.row(j));
        for (d, s) in b.row_mut(j).iter_mut().zip(x.row(i)) {
            *d = -s;
        }
        Ok(b)
    }
}

/// One Stiefel coordinate step on pair `(i, j)` with stepsize `eta`.
pub fn stiefel_coordinate_step(
    x: &Matrix,
    i: usize,
    j: usize,
    eta: f64,
    g: &Matrix,
) -> Result<(Matrix, CoordinateStepReport)> {
    let m = Stiefel::new(x.rows(), x.cols())?;
    let mut out = x.clone();
    let report = m.coordinate_step(&mut out, g, CoordinateIndex::Pair(i, j), eta)?;
    Ok((out, report))
}

/// Riemannian gradient under the canonical metric, `G − XGᵀX`.
pub fn stiefel_canonical_gradient(x: &Matrix, g: &Matrix) -> Matrix {
    g - &x.matmul(&g.t_matmul(x))
}

/// Canonical metric `tr(Uᵀ(I − ½XXᵀ)V)`.
pub fn stiefel_canonical_inner(x: &Matrix, u: &Matrix, v: &Matrix) -> f64 {
    let xv = x.t_matmul(v);
    let ux = x.t_matmul(u);
    frobenius_inner(u, v).expect("same shape") - 0.5 * frobenius_inner(&ux, &xv).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_one_step() {
        let x = Matrix::from_rows(&[[1.0], [0.0]]);
        let g = Matrix::from_rows(&[[0.0], [1.0]]);
        let (y, rep) = stiefel_coordinate_step(&x, 0, 1, 1.0, &g).unwrap();
        assert_eq!(rep.theta, -1.0);
        assert!((y[(0, 0)] - 1f64.cos()).abs() < 1e-15);
        assert!((y[(1, 0)] + 1f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn gradient_along_x_is_stationary() {
        let mut rng = Rng::new(3);
        let m = Stiefel::new(5, 2).unwrap();
        let x = m.random_point(&mut rng);
        for l in m.enumerate_basis() {
            let th = m.coordinate_derivative(&x, &x, l).unwrap();
            assert!(th.abs() < 1e-15);
        }
        let s = Matrix::from_rows(&[[1.0, 0.3], [0.3, -2.0]]);
        let grad = m.riemannian_gradient(&x, &x.matmul(&s)).unwrap();
        assert!(grad.max_abs() < 1e-14);
    }

    #[test]
    fn enumeration_order() {
        let m = Stiefel::new(3, 1).unwrap();
        assert_eq!(
            m.enumerate_basis(),
            vec![
                CoordinateIndex::Pair(0, 1),
                CoordinateIndex::Pair(0, 2),
                CoordinateIndex::Pair(1, 2)
            ]
        );
        assert!(m.check_index(CoordinateIndex::Pair(1, 1)).is_err());
        assert!(m.check_index(CoordinateIndex::Pair(0, 3)).is_err());
    }

    #[test]
    fn feasibility_of_scaled_axes() {
        let m = Stiefel::new(4, 2).unwrap();
        assert_eq!(m.feasibility_residual(&Matrix::eye(4, 2)).unwrap(), 0.0);
        let r = m.feasibility_residual(&Matrix::eye(4, 2).scale(1.1)).unwrap();
        let expect = 0.21f64 * 2f64.sqrt();
        assert!((r - expect).abs() < 1e-14);
    }
}
