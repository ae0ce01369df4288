use super::stiefel::{givens_rows, pair_of};
use super::{orthonormality_residual, qr_retraction_flops, skew_row_derivative};
use crate::dense::{thin_qr, thin_svd, Matrix, RotationKind};
use crate::error::Result;
use crate::manifold::{
    check_dims, strict_pair_at, CoordinateIndex, Family, Manifold, ManifoldDescriptor,
    RetractInfo, Touched,
};
use crate::rng::Rng;

/// `p`-dimensional subspaces of `ℝⁿ`, stored as orthonormal representatives.
///
/// Coordinate updates are the Stiefel row rotations. They commute with the
/// right action `X ↦ XQ`, so they are well defined on subspaces.
#[derive(Clone, Debug)]
pub struct Grassmann {
    n: usize,
    p: usize,
}

impl Grassmann {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        check_dims(Family::Grassmann, p >= 1 && p <= n, "need 1 <= p <= n")?;
        Ok(Self { n, p })
    }
}

impl Manifold for Grassmann {
    fn family(&self) -> Family {
        Family::Grassmann
    }

    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor::Grassmann { n: self.n, p: self.p }
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    fn feasibility_residual(&self, x: &Matrix) -> Result<f64> {
        x.check_shape(self.ambient_shape())?;
        Ok(orthonormality_residual(x))
    }

    /// Horizontal projection `(I − XXᵀ)G`.
    fn riemannian_gradient(&self, x: &Matrix, g: &Matrix) -> Result<Matrix> {
        x.check_shape(self.ambient_shape())?;
        g.check_shape(self.ambient_shape())?;
        Ok(g - &x.matmul(&x.t_matmul(g)))
    }

    fn basis_size(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn index_at(&self, pos: usize) -> CoordinateIndex {
        let (i, j) = strict_pair_at(self.n, pos);
        CoordinateIndex::Pair(i, j)
    }

    fn check_index(&self, l: CoordinateIndex) -> Result<()> {
        pair_of(Family::Grassmann, self.n, l).map(|_| ())
    }

    fn coordinate_derivative(&self, x: &Matrix, g: &Matrix, l: CoordinateIndex) -> Result<f64> {
        let (i, j) = pair_of(Family::Grassmann, self.n, l)?;
        Ok(skew_row_derivative(x, g, i, j))
    }

    fn coordinate_retract_in_place(
        &self,
        x: &mut Matrix,
        l: CoordinateIndex,
        t: f64,
    ) -> Result<RetractInfo> {
        let (i, j) = pair_of(Family::Grassmann, self.n, l)?;
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
        // XᵀG, X(XᵀG) and the subtraction.
        4 * n * p * p + n * p + qr_retraction_flops(n, p)
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
        let (i, j) = pair_of(Family::Grassmann, self.n, l)?;
        let mut b = Matrix::zeros(self.n, self.p);
        b.row_mut(i).copy_from_slice(x.row(j));
        for (d, s) in b.row_mut(j).iter_mut().zip(x.row(i)) {
            *d = -s;
        }
        Ok(b)
    }
}

/// Geodesic distance between the column spans of two orthonormal matrices,
/// `sqrt(Σ φ_k²)` over the principal angles.
///
/// The angles are taken as `atan2(sin φ, cos φ)` with the sines from
/// `(I − XXᵀ)Y` and the cosines from `XᵀY`, which stays accurate for nearly
/// equal subspaces where `arccos` loses half the digits.
pub fn grassmann_distance(x: &Matrix, y: &Matrix) -> Result<f64> {
    y.check_shape(x.shape())?;
    let xty = x.t_matmul(y);
    let resid = y - &x.matmul(&xty);
    let (_, cos, _) = thin_svd(&xty);
    let (_, mut sin, _) = thin_svd(&resid);
    sin.reverse();
    Ok(cos
        .iter()
        .zip(&sin)
        .map(|(&c, &s)| {
            let phi = s.atan2(c.clamp(-1.0, 1.0));
            phi * phi
        })
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn orthogonal_lines() {
        let x = Matrix::eye(4, 1);
        let mut y = Matrix::zeros(4, 1);
        y[(1, 0)] = 1.0;
        assert!((grassmann_distance(&x, &y).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(grassmann_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn horizontal_gradient_is_kept() {
        let x = Matrix::eye(4, 2);
        let g = Matrix::from_rows(&[[0.0, 0.0], [0.0, 0.0], [1.0, 2.0], [3.0, -1.0]]);
        let m = Grassmann::new(4, 2).unwrap();
        assert_eq!(m.riemannian_gradient(&x, &g).unwrap(), g);
    }
}
