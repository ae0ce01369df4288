use crate::dense::{dot, solve_sym_lyapunov, sym_eig, Matrix};
use crate::error::Result;
use crate::manifold::{
    check_dims, invalid_index, weak_pair_at, CoordinateIndex, Family, Manifold,
    ManifoldDescriptor, RetractInfo, Touched,
};
use crate::rng::Rng;

/// Symmetric positive definite `n×n` matrices with the Bures–Wasserstein metric.
///
/// The basis is `E_ij X + X E_ij` with `E_ij = e_i e_jᵀ + e_j e_iᵀ` for `i < j`
/// and `E_ii = 2 e_i e_iᵀ`. The coordinate retraction is the congruence
/// `(I + tE) X (I + tE)`, which changes rows and columns `i` and `j` only.
#[derive(Clone, Debug)]
pub struct SpdBuresWasserstein {
    n: usize,
}

impl SpdBuresWasserstein {
    pub fn new(n: usize) -> Result<Self> {
        check_dims(Family::SpdBuresWasserstein, n >= 1, "need n >= 1")?;
        Ok(Self { n })
    }

    fn pair(&self, l: CoordinateIndex) -> Result<(usize, usize)> {
        match l {
            CoordinateIndex::Pair(i, j) if i <= j && j < self.n => Ok((i, j)),
            _ => Err(invalid_index(Family::SpdBuresWasserstein, l)),
        }
    }
}

/// `(I + tE_ij) X (I + tE_ij)` assembled symmetrically in place.
fn congruence_in_place(x: &mut Matrix, i: usize, j: usize, t: f64) {
    let n = x.rows();
    if i == j {
        let s = 1.0 + 2.0 * t;
        for a in 0..n {
            if a != i {
                let v = s * x[(a, i)];
                x[(a, i)] = v;
                x[(i, a)] = v;
            }
        }
        x[(i, i)] *= s * s;
        return;
    }
    let (xii, xjj, xij) = (x[(i, i)], x[(j, j)], x[(i, j)]);
    let t2 = t * t;
    for a in 0..n {
        if a == i || a == j {
            continue;
        }
        let (u, v) = (x[(a, i)] + t * x[(a, j)], x[(a, j)] + t * x[(a, i)]);
        x[(a, i)] = u;
        x[(i, a)] = u;
        x[(a, j)] = v;
        x[(j, a)] = v;
    }
    let two_t = 2.0 * t;
    x[(i, i)] = xii + two_t * xij + t2 * xjj;
    x[(j, j)] = xjj + two_t * xij + t2 * xii;
    let off = xij + t * (xii + xjj) + t2 * xij;
    x[(i, j)] = off;
    x[(j, i)] = off;
}

impl Manifold for SpdBuresWasserstein {
    fn family(&self) -> Family {
        Family::SpdBuresWasserstein
    }

    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor::SpdBuresWasserstein { n: self.n }
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.n, self.n)
    }

    /// Asymmetry plus the negative part of the smallest eigenvalue.
    fn feasibility_residual(&self, x: &Matrix) -> Result<f64> {
        x.check_shape(self.ambient_shape())?;
        let asym = (x - &x.transpose()).frobenius_norm();
        let lmin = match sym_eig(&x.sym()) {
            Ok((_, l)) => l[0],
            Err(_) => f64::NEG_INFINITY,
        };
        Ok(asym + (-lmin).max(0.0))
    }

    /// `2(sym(G) X + X sym(G))`.
    fn riemannian_gradient(&self, x: &Matrix, g: &Matrix) -> Result<Matrix> {
        x.check_shape(self.ambient_shape())?;
        g.check_shape(self.ambient_shape())?;
        let s = g.sym();
        Ok((&s.matmul(x) + &x.matmul(&s)).scale(2.0))
    }

    /// `sqrt(½ tr(L U))` with `XL + LX = U`.
    fn metric_norm(&self, x: &Matrix, u: &Matrix) -> f64 {
        match solve_sym_lyapunov(x, u) {
            Ok(l) => (0.5 * crate::dense::frobenius_inner(&l, u).unwrap_or(0.0)).abs().sqrt(),
            Err(_) => f64::NAN,
        }
    }

    fn basis_size(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    fn index_at(&self, pos: usize) -> CoordinateIndex {
        let (i, j) = weak_pair_at(self.n, pos);
        CoordinateIndex::Pair(i, j)
    }

    fn check_index(&self, l: CoordinateIndex) -> Result<()> {
        self.pair(l).map(|_| ())
    }

    /// `⟨G, E_ij X + X E_ij⟩` from rows and columns `i`, `j`.
    fn coordinate_derivative(&self, x: &Matrix, g: &Matrix, l: CoordinateIndex) -> Result<f64> {
        let (i, j) = self.pair(l)?;
        let col_dot = |a: usize, b: usize| (0..self.n).map(|r| g[(r, a)] * x[(r, b)]).sum::<f64>();
        if i == j {
            return Ok(2.0 * dot(g.row(i), x.row(i)) + 2.0 * col_dot(i, i));
        }
        Ok(dot(g.row(i), x.row(j)) + dot(g.row(j), x.row(i)) + col_dot(j, i) + col_dot(i, j))
    }

    /// A step of size `η` moves along `−2ηθ B_ℓ`, the Bures–Wasserstein
    /// gradient step restricted to the coordinate.
    fn step_parameter(&self, theta: f64, eta: f64) -> f64 {
        -2.0 * eta * theta
    }

    fn coordinate_retract_in_place(
        &self,
        x: &mut Matrix,
        l: CoordinateIndex,
        t: f64,
    ) -> Result<RetractInfo> {
        let (i, j) = self.pair(l)?;
        if t == 0.0 {
            return Ok(RetractInfo::IDENTITY);
        }
        congruence_in_place(x, i, j, t);
        Ok(RetractInfo {
            touched: Touched::Cross(i, j),
            clamped: false,
        })
    }

    /// `X + tU + t² L X L` with `XL + LX = U`.
    fn full_retract(&self, x: &Matrix, u: &Matrix, t: f64) -> Result<Matrix> {
        u.check_shape(x.shape())?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        let l = solve_sym_lyapunov(x, u)?;
        let mut y = x.clone();
        y.axpy(t, u);
        y.axpy(t * t, &l.matmul(x).matmul(&l));
        Ok(y.sym())
    }

    fn derivative_flops(&self, l: CoordinateIndex) -> u64 {
        let n = self.n as u64;
        match l {
            CoordinateIndex::Pair(i, j) if i == j => 4 * n,
            _ => 8 * n,
        }
    }

    fn update_flops(&self, l: CoordinateIndex) -> u64 {
        let n = self.n as u64;
        match l {
            CoordinateIndex::Pair(i, j) if i == j => n + 3,
            _ => 4 * n + 8,
        }
    }

    fn scalar_flops(&self, _l: CoordinateIndex) -> u64 {
        5
    }

    fn full_step_flops(&self) -> u64 {
        let n = self.n as u64;
        // Gradient (two products), Lyapunov solve with Jacobi at 10 sweeps, L X L.
        4 * n * n * n + 10 * 6 * n * n * n + 4 * n * n * n + 4 * n * n * n + 3 * n * n
    }

    fn epoch_probe(&self, x: &Matrix) -> bool {
        matches!(sym_eig(&x.sym()), Ok((_, l)) if l[0] > 0.0)
    }

    fn random_point(&self, rng: &mut Rng) -> Matrix {
        let q = rng.orthogonal(self.n);
        let d: Vec<f64> = (0..self.n).map(|_| rng.uniform(0.5, 2.0)).collect();
        let qd = Matrix::from_fn(self.n, self.n, |r, c| q[(r, c)] * d[c]);
        qd.matmul_t(&q).sym()
    }

    fn materialize_basis(&self, x: &Matrix, l: CoordinateIndex) -> Result<Matrix> {
        let (i, j) = self.pair(l)?;
        let mut e = Matrix::zeros(self.n, self.n);
        if i == j {
            e[(i, i)] = 2.0;
        } else {
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
        }
        Ok(&e.matmul(x) + &x.matmul(&e))
    }
}

/// `X − 2ηθ(E_ij X + X E_ij) + 4η²θ² E_ij X E_ij`.
pub fn spd_bw_coordinate_step(x: &Matrix, i: usize, j: usize, eta: f64, g: &Matrix) -> Result<Matrix> {
    let m = SpdBuresWasserstein::new(x.rows())?;
    x.check_shape(m.ambient_shape())?;
    let mut out = x.clone();
    m.coordinate_step(&mut out, g, CoordinateIndex::Pair(i, j), eta)?;
    Ok(out)
}
