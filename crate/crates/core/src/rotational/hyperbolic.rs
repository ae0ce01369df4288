use super::stiefel::pair_of;
use crate::dense::{dot, rotate_pair, Lu, Matrix, RotationKind};
use crate::error::Result;
use crate::manifold::{
    check_dims, strict_pair_at, CoordinateIndex, CoordinateStepReport, Family, Manifold,
    ManifoldDescriptor, RetractInfo, Touched,
};
use crate::rng::Rng;

const CAYLEY_PIVOT_TOL: f64 = 1e-12;

/// Generalized hyperboloid `{X ∈ ℝ^{n×p} : −XᵀJX = I_p}`.
///
/// `J` is diagonal with `−1` on the first `p` entries and `+1` elsewhere; it is
/// never formed. For `p = 1` this is the hyperboloid model with
/// `J = diag(−1, 1, …, 1)`. Rows `0..p` are the time rows.
///
/// The basis is `H_ij J X`. Rotating a time row against a space row is a
/// Lorentz boost; any other pair is a Givens rotation.
#[derive(Clone, Debug)]
pub struct Hyperbolic {
    n: usize,
    p: usize,
}

impl Hyperbolic {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        check_dims(Family::Hyperbolic, p >= 1 && p < n, "need 1 <= p < n")?;
        Ok(Self { n, p })
    }

    #[inline]
    fn sign(&self, k: usize) -> f64 {
        if k < self.p {
            -1.0
        } else {
            1.0
        }
    }

    /// `JA`.
    pub fn apply_j(&self, a: &Matrix) -> Matrix {
        let mut out = a.clone();
        for k in 0..self.p.min(a.rows()) {
            for v in out.row_mut(k) {
                *v = -*v;
            }
        }
        out
    }

    /// `⟨U, V⟩_L = tr(UᵀJV)`.
    pub fn lorentz_inner(&self, u: &Matrix, v: &Matrix) -> f64 {
        (0..u.rows()).map(|k| self.sign(k) * dot(u.row(k), v.row(k))).sum()
    }

    /// Orthogonal projection onto the tangent space, `A + X sym(XᵀJA)`.
    pub fn project(&self, x: &Matrix, a: &Matrix) -> Matrix {
        let s = x.t_matmul(&self.apply_j(a)).sym();
        a + &x.matmul(&s)
    }

    /// Positions of the pairs mixing a time row with a space row, in
    /// enumeration order.
    pub fn time_space_positions(&self) -> Vec<usize> {
        (0..self.basis_size())
            .filter(|&k| {
                let (i, j) = strict_pair_at(self.n, k);
                i < self.p && j >= self.p
            })
            .collect()
    }

    fn kind_and_scale(&self, i: usize, j: usize) -> (RotationKind, f64) {
        match (i < self.p, j < self.p) {
            (true, false) => (RotationKind::Hyperbolic, 1.0),
            (true, true) => (RotationKind::Circular, -1.0),
            _ => (RotationKind::Circular, 1.0),
        }
    }
}

/// `J_jj⟨G_i, X_j⟩ − J_ii⟨G_j, X_i⟩` for the signature with `p` time rows.
#[inline]
pub(crate) fn lorentz_pair_derivative(
    gi: &[f64],
    gj: &[f64],
    xi: &[f64],
    xj: &[f64],
    si: f64,
    sj: f64,
) -> f64 {
    sj * dot(gi, xj) - si * dot(gj, xi)
}

impl Manifold for Hyperbolic {
    fn family(&self) -> Family {
        Family::Hyperbolic
    }

    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor::Hyperbolic { n: self.n, p: self.p }
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    fn feasibility_residual(&self, x: &Matrix) -> Result<f64> {
        x.check_shape(self.ambient_shape())?;
        let mut r = x.t_matmul(&self.apply_j(x));
        for k in 0..self.p {
            r[(k, k)] += 1.0;
        }
        Ok(r.frobenius_norm())
    }

    /// `J∇f + X sym(Xᵀ∇f)`, the gradient for the Lorentz metric.
    fn riemannian_gradient(&self, x: &Matrix, g: &Matrix) -> Result<Matrix> {
        x.check_shape(self.ambient_shape())?;
        g.check_shape(self.ambient_shape())?;
        let s = x.t_matmul(g).sym();
        Ok(&self.apply_j(g) + &x.matmul(&s))
    }

    fn metric_norm(&self, _x: &Matrix, u: &Matrix) -> f64 {
        self.lorentz_inner(u, u).abs().sqrt()
    }

    fn basis_size(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn index_at(&self, pos: usize) -> CoordinateIndex {
        let (i, j) = strict_pair_at(self.n, pos);
        CoordinateIndex::Pair(i, j)
    }

    fn check_index(&self, l: CoordinateIndex) -> Result<()> {
        pair_of(Family::Hyperbolic, self.n, l).map(|_| ())
    }

    fn coordinate_derivative(&self, x: &Matrix, g: &Matrix, l: CoordinateIndex) -> Result<f64> {
        let (i, j) = pair_of(Family::Hyperbolic, self.n, l)?;
        Ok(lorentz_pair_derivative(
            g.row(i),
            g.row(j),
            x.row(i),
            x.row(j),
            self.sign(i),
            self.sign(j),
        ))
    }

    fn coordinate_retract_in_place(
        &self,
        x: &mut Matrix,
        l: CoordinateIndex,
        t: f64,
    ) -> Result<RetractInfo> {
        let (i, j) = pair_of(Family::Hyperbolic, self.n, l)?;
        if t == 0.0 {
            return Ok(RetractInfo::IDENTITY);
        }
        let (kind, scale) = self.kind_and_scale(i, j);
        let (c, s) = kind.coefficients(scale * t);
        let (ri, rj) = x.two_rows_mut(i, j);
        rotate_pair(ri, rj, c, s, kind);
        Ok(RetractInfo {
            touched: Touched::Rows(i, j),
            clamped: false,
        })
    }

    fn full_retract(&self, x: &Matrix, u: &Matrix, t: f64) -> Result<Matrix> {
        hyperbolic_cayley_retract_signature(x, u, t, self.p)
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
        let gradient = 4 * n * p * p + n * p + p * p;
        // W_U, the two Cayley factors, their LU solve against X.
        let cayley = 8 * n * n * p + 4 * n * p * p + 3 * n * n + 2 * n * n * n / 3 + 4 * n * n * p;
        gradient + cayley
    }

    fn time_cyclic_positions(&self) -> Option<Vec<usize>> {
        Some(self.time_space_positions())
    }

    fn rotation_for(&self, l: CoordinateIndex) -> Option<(usize, usize, RotationKind)> {
        match l {
            // Only the boost and ordinary space-space rotations keep the angle sign.
            CoordinateIndex::Pair(i, j) if !(i < self.p && j < self.p) => {
                Some((i, j, self.kind_and_scale(i, j).0))
            }
            _ => None,
        }
    }

    fn random_point(&self, rng: &mut Rng) -> Matrix {
        let mut x = Matrix::eye(self.n, self.p);
        for _ in 0..2 * self.basis_size().max(1) {
            let l = self.index_at(rng.index(self.basis_size()));
            let t = rng.uniform(-0.3, 0.3);
            self.coordinate_retract_in_place(&mut x, l, t).expect("valid index");
        }
        x
    }

    fn materialize_basis(&self, x: &Matrix, l: CoordinateIndex) -> Result<Matrix> {
        let (i, j) = pair_of(Family::Hyperbolic, self.n, l)?;
        let mut b = Matrix::zeros(self.n, self.p);
        let (si, sj) = (self.sign(i), self.sign(j));
        for (d, s) in b.row_mut(i).iter_mut().zip(x.row(j)) {
            *d = sj * s;
        }
        for (d, s) in b.row_mut(j).iter_mut().zip(x.row(i)) {
            *d = -si * s;
        }
        Ok(b)
    }
}

/// One hyperbolic coordinate step on pair `(i, j)` with stepsize `eta`.
pub fn hyperbolic_coordinate_step(
    x: &Matrix,
    i: usize,
    j: usize,
    eta: f64,
    g: &Matrix,
) -> Result<(Matrix, CoordinateStepReport)> {
    let m = Hyperbolic::new(x.rows(), x.cols())?;
    let mut out = x.clone();
    let report = m.coordinate_step(&mut out, g, CoordinateIndex::Pair(i, j), eta)?;
    Ok((out, report))
}

/// Cayley retraction `(I − t/2·W J)⁻¹(I + t/2·W J) X` with
/// `W = XUᵀP − PᵀUXᵀ` and `P = I + ½JXXᵀ`.
pub fn hyperbolic_cayley_retract(x: &Matrix, u: &Matrix, t: f64) -> Result<Matrix> {
    hyperbolic_cayley_retract_signature(x, u, t, x.cols())
}

fn hyperbolic_cayley_retract_signature(x: &Matrix, u: &Matrix, t: f64, p: usize) -> Result<Matrix> {
    u.check_shape(x.shape())?;
    if t == 0.0 {
        return Ok(x.clone());
    }
    let n = x.rows();
    let sign = |k: usize| if k < p { -1.0 } else { 1.0 };
    // XUᵀP = XUᵀ + ½(XUᵀJX)Xᵀ, and PᵀUXᵀ is its transpose with X and U swapped.
    let jx = Matrix::from_fn(n, x.cols(), |r, c| sign(r) * x[(r, c)]);
    let utjx = u.t_matmul(&jx);
    let a = &x.matmul_t(u) + &x.matmul(&utjx).matmul_t(x).scale(0.5);
    let w = &a - &a.transpose();
    let half = 0.5 * t;
    let lhs = Matrix::from_fn(n, n, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        id - half * w[(r, c)] * sign(c)
    });
    let rhs_op = Matrix::from_fn(n, n, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        id + half * w[(r, c)] * sign(c)
    });
    let rhs = rhs_op.matmul(x);
    Lu::factor(&lhs, CAYLEY_PIVOT_TOL)?.solve(&rhs)
}

/// Gradient under the canonical metric, `−J∇f − X∇fᵀX`.
pub fn hyperbolic_canonical_gradient(x: &Matrix, g: &Matrix) -> Matrix {
    let p = x.cols();
    let mut jg = g.clone();
    for k in 0..p.min(g.rows()) {
        for v in jg.row_mut(k) {
            *v = -*v;
        }
    }
    &(-&jg) - &x.matmul(&g.t_matmul(x))
}
