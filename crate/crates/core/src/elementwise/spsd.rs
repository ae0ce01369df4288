use crate::dense::{thin_svd, Matrix};
use crate::error::{Error, Result};
use crate::manifold::{
    check_dims, invalid_index, CoordinateIndex, Family, Manifold, ManifoldDescriptor,
    RetractInfo, Touched,
};
use crate::rng::Rng;

const RANK_TOL: f64 = 1e-10;

/// Rank-`p` positive semidefinite matrices `X = YYᵀ`, optimized over the
/// factor `Y ∈ ℝ^{n×p}`.
///
/// The factor space is open, so the basis is the standard basis `e_i e_jᵀ`
/// and a step changes one entry of `Y`. Gradients passed to this family are
/// gradients with respect to `Y`; see [`spsd_factor_gradient`].
#[derive(Clone, Debug)]
pub struct SpsdFactored {
    n: usize,
    p: usize,
}

impl SpsdFactored {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        check_dims(Family::SpsdFactored, p >= 1 && p <= n, "need 1 <= p <= n")?;
        Ok(Self { n, p })
    }

    fn entry(&self, l: CoordinateIndex) -> Result<(usize, usize)> {
        match l {
            CoordinateIndex::Entry(i, j) if i < self.n && j < self.p => Ok((i, j)),
            _ => Err(invalid_index(Family::SpsdFactored, l)),
        }
    }
}

/// A factor `Y` of full column rank.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredSpsdPoint(Matrix);

impl FactoredSpsdPoint {
    /// Checks that the smallest singular value exceeds `1e-10` times the largest.
    pub fn new(y: Matrix) -> Result<Self> {
        let (_, s, _) = thin_svd(&y);
        let (hi, lo) = (s[0], s[s.len() - 1]);
        if y.rows() < y.cols() || !(lo > RANK_TOL * hi) {
            return Err(Error::RankDeficient {
                column: s.iter().position(|&v| !(v > RANK_TOL * hi)).unwrap_or(0),
                pivot: lo,
            });
        }
        Ok(Self(y))
    }

    pub fn factor(&self) -> &Matrix {
        &self.0
    }

    pub fn into_factor(self) -> Matrix {
        self.0
    }

    /// `YYᵀ`.
    pub fn to_matrix(&self) -> Matrix {
        self.0.matmul_t(&self.0)
    }
}

/// Gradient with respect to `Y` of `F(YYᵀ)`, `2 sym(∇F) Y`.
pub fn spsd_factor_gradient(y: &Matrix, dfx: &Matrix) -> Result<Matrix> {
    dfx.check_shape((y.rows(), y.rows()))?;
    Ok(dfx.sym().matmul(y).scale(2.0))
}

impl Manifold for SpsdFactored {
    fn family(&self) -> Family {
        Family::SpsdFactored
    }

    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor::SpsdFactored { n: self.n, p: self.p }
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    fn feasibility_residual(&self, x: &Matrix) -> Result<f64> {
        x.check_shape(self.ambient_shape())?;
        Ok(0.0)
    }

    fn riemannian_gradient(&self, x: &Matrix, g: &Matrix) -> Result<Matrix> {
        x.check_shape(self.ambient_shape())?;
        g.check_shape(self.ambient_shape())?;
        Ok(g.clone())
    }

    fn basis_size(&self) -> usize {
        self.n * self.p
    }

    fn index_at(&self, pos: usize) -> CoordinateIndex {
        CoordinateIndex::Entry(pos / self.p, pos % self.p)
    }

    fn check_index(&self, l: CoordinateIndex) -> Result<()> {
        self.entry(l).map(|_| ())
    }

    fn coordinate_derivative(&self, _x: &Matrix, g: &Matrix, l: CoordinateIndex) -> Result<f64> {
        let (i, j) = self.entry(l)?;
        Ok(g[(i, j)])
    }

    fn coordinate_retract_in_place(
        &self,
        x: &mut Matrix,
        l: CoordinateIndex,
        t: f64,
    ) -> Result<RetractInfo> {
        let (i, j) = self.entry(l)?;
        if t == 0.0 {
            return Ok(RetractInfo::IDENTITY);
        }
        x[(i, j)] += t;
        Ok(RetractInfo {
            touched: Touched::Entry(i, j),
            clamped: false,
        })
    }

    fn full_retract(&self, x: &Matrix, u: &Matrix, t: f64) -> Result<Matrix> {
        u.check_shape(x.shape())?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        let mut y = x.clone();
        y.axpy(t, u);
        Ok(y)
    }

    fn derivative_flops(&self, _l: CoordinateIndex) -> u64 {
        1
    }

    fn update_flops(&self, _l: CoordinateIndex) -> u64 {
        2
    }

    fn scalar_flops(&self, _l: CoordinateIndex) -> u64 {
        0
    }

    fn full_step_flops(&self) -> u64 {
        2 * (self.n * self.p) as u64
    }

    fn random_point(&self, rng: &mut Rng) -> Matrix {
        let y = rng.gaussian(self.n, self.p);
        let norm = y.frobenius_norm();
        y.scale(1.0 / norm)
    }

    fn materialize_basis(&self, _x: &Matrix, l: CoordinateIndex) -> Result<Matrix> {
        let (i, j) = self.entry(l)?;
        let mut b = Matrix::zeros(self.n, self.p);
        b[(i, j)] = 1.0;
        Ok(b)
    }
}

/// `Y − ηθ e_i e_jᵀ` with `θ` read from the factor gradient `gy`.
pub fn spsd_coordinate_step(y: &FactoredSpsdPoint, i: usize, j: usize, eta: f64, gy: &Matrix) -> Result<FactoredSpsdPoint> {
    let m = SpsdFactored::new(y.0.rows(), y.0.cols())?;
    gy.check_shape(y.0.shape())?;
    let mut out = y.0.clone();
    m.coordinate_step(&mut out, gy, CoordinateIndex::Entry(i, j), eta)?;
    Ok(FactoredSpsdPoint(out))
}

/// Same step with `θ = [2 sym(D) Y]_ij` computed in `O(n)` from the dense
/// gradient `D = ∇F(YYᵀ)`.
pub fn spsd_coordinate_step_dense(
    y: &FactoredSpsdPoint,
    i: usize,
    j: usize,
    eta: f64,
    dfx: &Matrix,
) -> Result<FactoredSpsdPoint> {
    let m = SpsdFactored::new(y.0.rows(), y.0.cols())?;
    m.check_index(CoordinateIndex::Entry(i, j))?;
    dfx.check_shape((y.0.rows(), y.0.rows()))?;
    let theta = spsd_dense_derivative(&y.0, dfx, i, j);
    let mut out = y.0.clone();
    if theta.abs() >= crate::manifold::THETA_SKIP && eta != 0.0 && theta.is_finite() {
        m.coordinate_retract_in_place(&mut out, CoordinateIndex::Entry(i, j), -eta * theta)?;
    }
    Ok(FactoredSpsdPoint(out))
}

/// `Σ_k (D_ik + D_ki) Y_kj`.
pub fn spsd_dense_derivative(y: &Matrix, dfx: &Matrix, i: usize, j: usize) -> f64 {
    (0..y.rows()).map(|k| (dfx[(i, k)] + dfx[(k, i)]) * y[(k, j)]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_keeps_point() {
        let y = FactoredSpsdPoint::new(Matrix::eye(4, 2)).unwrap();
        let out = spsd_coordinate_step_dense(&y, 1, 1, 0.5, &Matrix::zeros(4, 4)).unwrap();
        assert_eq!(out, y);
    }

    #[test]
    fn dense_and_entry_paths_agree() {
        let mut rng = Rng::new(4);
        let y = FactoredSpsdPoint::new(rng.gaussian(5, 2)).unwrap();
        let d = rng.gaussian(5, 5);
        let gy = spsd_factor_gradient(y.factor(), &d).unwrap();
        for (i, j) in [(0, 0), (3, 1), (4, 0)] {
            let a = spsd_coordinate_step(&y, i, j, 0.1, &gy).unwrap();
            let b = spsd_coordinate_step_dense(&y, i, j, 0.1, &d).unwrap();
            assert!((&a.into_factor() - &b.into_factor()).max_abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_rank_deficient_factor() {
        let y = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]]);
        assert!(FactoredSpsdPoint::new(y).is_err());
    }
}
