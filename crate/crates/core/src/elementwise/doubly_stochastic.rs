use super::sinkhorn::{full_sinkhorn, sinkhorn_2x2, Sinkhorn2x2Input, SINKHORN_MAX_ITERS, SINKHORN_TOL};
use super::{scale_entry, fisher_norm, min_entry};
use crate::dense::{Lu, Matrix};
use crate::error::{Error, Result};
use crate::manifold::{
    check_dims, invalid_index, CoordinateIndex, CoordinateStepReport, Family, Manifold,
    ManifoldDescriptor, RetractInfo, Touched, SINKHORN_2X2_FLOPS, TRANSCENDENTAL_FLOPS,
};
use crate::rng::Rng;

const MARGINAL_SUM_TOL: f64 = 1e-12;
const GRADIENT_PIVOT_TOL: f64 = 1e-14;

/// Strictly positive `m×n` matrices with row sums `μ` and column sums `ν`.
///
/// The basis is `(e_i − e_{i+1})(e_j − e_{j+1})ᵀ` for `i < m − 1`, `j < n − 1`.
/// A step multiplies the 2×2 block at `(i, j)` elementwise by an exponential
/// and rebalances that block alone to its own row and column sums, so every
/// other entry stays put and the marginals are preserved exactly.
#[derive(Clone, Debug)]
pub struct DoublyStochastic {
    mu: Vec<f64>,
    nu: Vec<f64>,
}

impl DoublyStochastic {
    pub fn new(mu: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        check_dims(Family::DoublyStochastic, mu.len() >= 2 && nu.len() >= 2, "need m, n >= 2")?;
        let positive = mu.iter().chain(&nu).all(|&v| v > 0.0 && v.is_finite());
        check_dims(Family::DoublyStochastic, positive, "marginals must be positive")?;
        let (sm, sn) = (mu.iter().sum::<f64>(), nu.iter().sum::<f64>());
        check_dims(
            Family::DoublyStochastic,
            (sm - 1.0).abs() <= MARGINAL_SUM_TOL && (sn - 1.0).abs() <= MARGINAL_SUM_TOL,
            "marginals must each sum to 1",
        )?;
        Ok(Self { mu, nu })
    }

    /// Uniform marginals `1/m` and `1/n`.
    pub fn uniform(m: usize, n: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m], vec![1.0 / n as f64; n])
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// The product coupling `μνᵀ`.
    pub fn product_point(&self) -> Matrix {
        Matrix::from_fn(self.mu.len(), self.nu.len(), |i, j| self.mu[i] * self.nu[j])
    }

    fn entry(&self, l: CoordinateIndex) -> Result<(usize, usize)> {
        match l {
            CoordinateIndex::Entry(i, j) if i + 1 < self.mu.len() && j + 1 < self.nu.len() => Ok((i, j)),
            _ => Err(invalid_index(Family::DoublyStochastic, l)),
        }
    }
}

impl Manifold for DoublyStochastic {
    fn family(&self) -> Family {
        Family::DoublyStochastic
    }

    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor::DoublyStochastic {
            mu: self.mu.clone(),
            nu: self.nu.clone(),
        }
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.mu.len(), self.nu.len())
    }

    fn feasibility_residual(&self, x: &Matrix) -> Result<f64> {
        x.check_shape(self.ambient_shape())?;
        let rows: f64 = x.row_sums().iter().zip(&self.mu).map(|(s, t)| (s - t).powi(2)).sum();
        let cols: f64 = x.col_sums().iter().zip(&self.nu).map(|(s, t)| (s - t).powi(2)).sum();
        let neg: f64 = x.as_slice().iter().map(|v| v.min(0.0).powi(2)).sum();
        Ok((rows + cols + neg).sqrt())
    }

    fn riemannian_gradient(&self, x: &Matrix, g: &Matrix) -> Result<Matrix> {
        ds_riemannian_gradient(x, g, &self.mu, &self.nu)
    }

    fn metric_norm(&self, x: &Matrix, u: &Matrix) -> f64 {
        fisher_norm(x, u)
    }

    fn basis_size(&self) -> usize {
        (self.mu.len() - 1) * (self.nu.len() - 1)
    }

    fn index_at(&self, pos: usize) -> CoordinateIndex {
        let w = self.nu.len() - 1;
        CoordinateIndex::Entry(pos / w, pos % w)
    }

    fn check_index(&self, l: CoordinateIndex) -> Result<()> {
        self.entry(l).map(|_| ())
    }

    fn coordinate_derivative(&self, _x: &Matrix, g: &Matrix, l: CoordinateIndex) -> Result<f64> {
        let (i, j) = self.entry(l)?;
        Ok(g[(i, j)] - g[(i, j + 1)] - g[(i + 1, j)] + g[(i + 1, j + 1)])
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
        let (a, b, c, d) = (x[(i, j)], x[(i, j + 1)], x[(i + 1, j)], x[(i + 1, j + 1)]);
        let mut clamped = false;
        let mut scaled = |v: f64, sign: f64| {
            let (y, hit) = scale_entry(v, sign * t / v);
            clamped |= hit;
            y
        };
        let input = Sinkhorn2x2Input {
            a: scaled(a, 1.0),
            b: scaled(b, -1.0),
            c: scaled(c, -1.0),
            d: scaled(d, 1.0),
            p: (a + b, c + d),
            q: (a + c, b + d),
        };
        let out = sinkhorn_2x2(&input)?;
        x[(i, j)] = out[0][0];
        x[(i, j + 1)] = out[0][1];
        x[(i + 1, j)] = out[1][0];
        x[(i + 1, j + 1)] = out[1][1];
        Ok(RetractInfo {
            touched: Touched::Block2 { row: i, col: j },
            clamped,
        })
    }

    /// `SK(X ⊙ exp(tU ⊘ X))`.
    fn full_retract(&self, x: &Matrix, u: &Matrix, t: f64) -> Result<Matrix> {
        u.check_shape(x.shape())?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        let y = x.zip_map(u, |xv, uv| scale_entry(xv, t * uv / xv).0);
        full_sinkhorn(&y, &self.mu, &self.nu, SINKHORN_TOL, SINKHORN_MAX_ITERS)
    }

    fn derivative_flops(&self, _l: CoordinateIndex) -> u64 {
        3
    }

    /// Four scaled exponentials, the block sums and the closed-form balancing.
    fn update_flops(&self, _l: CoordinateIndex) -> u64 {
        4 * (2 + TRANSCENDENTAL_FLOPS) + 4 + SINKHORN_2X2_FLOPS
    }

    fn scalar_flops(&self, _l: CoordinateIndex) -> u64 {
        1
    }

    /// Gradient system by LU plus a full retraction with 50 balancing sweeps.
    fn full_step_flops(&self) -> u64 {
        let (m, n) = (self.mu.len() as u64, self.nu.len() as u64);
        let k = m + n - 1;
        let gradient = 3 * m * n + 2 * k * k * k / 3 + 2 * k * k + 4 * m * n;
        let retraction = m * n * (3 + TRANSCENDENTAL_FLOPS) + 50 * 4 * m * n;
        gradient + retraction
    }

    fn epoch_probe(&self, x: &Matrix) -> bool {
        min_entry(x) > 0.0
    }

    fn renormalize(&self, x: &mut Matrix) -> Result<()> {
        *x = full_sinkhorn(x, &self.mu, &self.nu, SINKHORN_TOL, SINKHORN_MAX_ITERS)?;
        Ok(())
    }

    fn random_point(&self, rng: &mut Rng) -> Matrix {
        let (m, n) = self.ambient_shape();
        let u = Matrix::from_fn(m, n, |i, j| self.mu[i] * self.nu[j] * rng.uniform(0.5, 1.5));
        full_sinkhorn(&u, &self.mu, &self.nu, SINKHORN_TOL, SINKHORN_MAX_ITERS).expect("positive input balances")
    }

    fn materialize_basis(&self, _x: &Matrix, l: CoordinateIndex) -> Result<Matrix> {
        let (i, j) = self.entry(l)?;
        let mut b = Matrix::zeros(self.mu.len(), self.nu.len());
        b[(i, j)] = 1.0;
        b[(i, j + 1)] = -1.0;
        b[(i + 1, j)] = -1.0;
        b[(i + 1, j + 1)] = 1.0;
        Ok(b)
    }
}

/// Riemannian gradient under the Fisher metric, `X ⊙ (G − α1ᵀ − 1βᵀ)`.
///
/// `(α, β)` solve `α ⊙ (X1) + Xβ = A1`, `β ⊙ (Xᵀ1) + Xᵀα = Aᵀ1` with
/// `A = X ⊙ G`. The system has a one-dimensional kernel `(c1, −c1)`, removed
/// by fixing the last entry of `β` to zero and dropping the last column
/// equation.
pub fn ds_riemannian_gradient(x: &Matrix, g: &Matrix, mu: &[f64], nu: &[f64]) -> Result<Matrix> {
    let (m, n) = x.shape();
    g.check_shape((m, n))?;
    if mu.len() != m || nu.len() != n {
        return Err(Error::ShapeMismatch {
            expected: (m, n),
            found: (mu.len(), nu.len()),
        });
    }
    let a = x.hadamard(g);
    let (ar, ac) = (a.row_sums(), a.col_sums());
    let (xr, xc) = (x.row_sums(), x.col_sums());
    let k = m + n - 1;
    let mut sys = Matrix::zeros(k, k);
    let mut rhs = Matrix::zeros(k, 1);
    for i in 0..m {
        sys[(i, i)] = xr[i];
        for j in 0..n - 1 {
            sys[(i, m + j)] = x[(i, j)];
        }
        rhs[(i, 0)] = ar[i];
    }
    for j in 0..n - 1 {
        for i in 0..m {
            sys[(m + j, i)] = x[(i, j)];
        }
        sys[(m + j, m + j)] = xc[j];
        rhs[(m + j, 0)] = ac[j];
    }
    let sol = Lu::factor(&sys, GRADIENT_PIVOT_TOL * sys.max_abs())?.solve(&rhs)?;
    let beta = |j: usize| if j + 1 < n { sol[(m + j, 0)] } else { 0.0 };
    Ok(Matrix::from_fn(m, n, |i, j| x[(i, j)] * (g[(i, j)] - sol[(i, 0)] - beta(j))))
}

/// One coordinate Sinkhorn step on the block at `(i, j)`.
pub fn ds_coordinate_step(
    x: &Matrix,
    i: usize,
    j: usize,
    eta: f64,
    g: &Matrix,
    mu: &[f64],
    nu: &[f64],
) -> Result<(Matrix, CoordinateStepReport)> {
    let m = DoublyStochastic::new(mu.to_vec(), nu.to_vec())?;
    x.check_shape(m.ambient_shape())?;
    let mut out = x.clone();
    let report = m.coordinate_step(&mut out, g, CoordinateIndex::Entry(i, j), eta)?;
    Ok((out, report))
}
