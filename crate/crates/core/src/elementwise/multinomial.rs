use super::{scale_entry, fisher_norm, min_entry};
use crate::dense::Matrix;
use crate::error::Result;
use crate::manifold::{
    check_dims, invalid_index, CoordinateIndex, CoordinateStepReport, Family, Manifold,
    ManifoldDescriptor, RetractInfo, Touched, TRANSCENDENTAL_FLOPS,
};
use crate::rng::Rng;

/// Strictly positive `n×p` matrices whose rows sum to one.
///
/// The basis is `e_i (e_j − e_{j+1})ᵀ`. A step scales the two entries of row
/// `i` exponentially and rescales them so their sum, and hence the row sum,
/// is unchanged.
#[derive(Clone, Debug)]
pub struct Multinomial {
    n: usize,
    p: usize,
}

impl Multinomial {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        check_dims(Family::Multinomial, n >= 1 && p >= 2, "need n >= 1, p >= 2")?;
        Ok(Self { n, p })
    }

    fn entry(&self, l: CoordinateIndex) -> Result<(usize, usize)> {
        match l {
            CoordinateIndex::Entry(i, j) if i < self.n && j + 1 < self.p => Ok((i, j)),
            _ => Err(invalid_index(Family::Multinomial, l)),
        }
    }
}

/// Scales `x` row by row so every row sums to one.
fn normalize_rows(x: &mut Matrix) {
    for i in 0..x.rows() {
        let s: f64 = x.row(i).iter().sum();
        for v in x.row_mut(i) {
            *v /= s;
        }
    }
}

impl Manifold for Multinomial {
    fn family(&self) -> Family {
        Family::Multinomial
    }

    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor::Multinomial { n: self.n, p: self.p }
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    fn feasibility_residual(&self, x: &Matrix) -> Result<f64> {
        x.check_shape(self.ambient_shape())?;
        Ok(x.row_sums().iter().map(|s| (s - 1.0).powi(2)).sum::<f64>().sqrt())
    }

    /// `X ⊙ (G − α1ᵀ)` with `α_i` the `X`-weighted mean of row `i` of `G`.
    fn riemannian_gradient(&self, x: &Matrix, g: &Matrix) -> Result<Matrix> {
        x.check_shape(self.ambient_shape())?;
        g.check_shape(self.ambient_shape())?;
        let alpha: Vec<f64> = (0..self.n)
            .map(|i| {
                let w: f64 = x.row(i).iter().sum();
                crate::dense::dot(x.row(i), g.row(i)) / w
            })
            .collect();
        Ok(Matrix::from_fn(self.n, self.p, |i, j| x[(i, j)] * (g[(i, j)] - alpha[i])))
    }

    fn metric_norm(&self, x: &Matrix, u: &Matrix) -> f64 {
        fisher_norm(x, u)
    }

    fn basis_size(&self) -> usize {
        self.n * (self.p - 1)
    }

    fn index_at(&self, pos: usize) -> CoordinateIndex {
        let w = self.p - 1;
        CoordinateIndex::Entry(pos / w, pos % w)
    }

    fn check_index(&self, l: CoordinateIndex) -> Result<()> {
        self.entry(l).map(|_| ())
    }

    fn coordinate_derivative(&self, _x: &Matrix, g: &Matrix, l: CoordinateIndex) -> Result<f64> {
        let (i, j) = self.entry(l)?;
        Ok(g[(i, j)] - g[(i, j + 1)])
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
        let (a, b) = (x[(i, j)], x[(i, j + 1)]);
        let (ya, ca) = scale_entry(a, t / a);
        let (yb, cb) = scale_entry(b, -t / b);
        let s = (a + b) / (ya + yb);
        x[(i, j)] = ya * s;
        x[(i, j + 1)] = yb * s;
        Ok(RetractInfo {
            touched: Touched::RowSegment { row: i, col: j },
            clamped: ca || cb,
        })
    }

    /// Row normalization of `X ⊙ exp(tU ⊘ X)`.
    fn full_retract(&self, x: &Matrix, u: &Matrix, t: f64) -> Result<Matrix> {
        u.check_shape(x.shape())?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        let mut y = x.zip_map(u, |xv, uv| scale_entry(xv, t * uv / xv).0);
        normalize_rows(&mut y);
        Ok(y)
    }

    fn derivative_flops(&self, _l: CoordinateIndex) -> u64 {
        1
    }

    /// Two scaled exponentials and the pair rescaling.
    fn update_flops(&self, _l: CoordinateIndex) -> u64 {
        2 * (3 + TRANSCENDENTAL_FLOPS) + 5
    }

    fn scalar_flops(&self, _l: CoordinateIndex) -> u64 {
        1
    }

    fn full_step_flops(&self) -> u64 {
        let np = (self.n * self.p) as u64;
        // Gradient: weighted row means and X ⊙ (G − α). Retraction: exponentials and row sums.
        4 * np + np * (3 + TRANSCENDENTAL_FLOPS) + 2 * np
    }

    fn epoch_probe(&self, x: &Matrix) -> bool {
        min_entry(x) > 0.0
    }

    fn renormalize(&self, x: &mut Matrix) -> Result<()> {
        normalize_rows(x);
        Ok(())
    }

    fn random_point(&self, rng: &mut Rng) -> Matrix {
        let mut x = rng.uniform_matrix(self.n, self.p, 0.5, 1.5);
        normalize_rows(&mut x);
        x
    }

    fn materialize_basis(&self, _x: &Matrix, l: CoordinateIndex) -> Result<Matrix> {
        let (i, j) = self.entry(l)?;
        let mut b = Matrix::zeros(self.n, self.p);
        b[(i, j)] = 1.0;
        b[(i, j + 1)] = -1.0;
        Ok(b)
    }
}

/// One multinomial coordinate step on entries `(i, j)`, `(i, j + 1)`.
pub fn multinomial_coordinate_step(
    x: &Matrix,
    i: usize,
    j: usize,
    eta: f64,
    g: &Matrix,
) -> Result<(Matrix, CoordinateStepReport)> {
    let m = Multinomial::new(x.rows(), x.cols())?;
    let mut out = x.clone();
    let report = m.coordinate_step(&mut out, g, CoordinateIndex::Entry(i, j), eta)?;
    Ok((out, report))
}
