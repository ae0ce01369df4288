use crate::dense::{dot, solve_sym_lyapunov, Lu, Matrix};
use crate::error::{Error, Result};
use crate::manifold::{
    check_dims, invalid_index, weak_pair_at, CoordinateIndex, CoordinateStepReport, Family,
    FlopCount, Manifold, ManifoldDescriptor, RetractInfo, Touched, TRANSCENDENTAL_FLOPS,
};
use crate::rng::Rng;

const CAYLEY_PIVOT_TOL: f64 = 1e-12;

/// `ΩX` for a matrix with `2n` rows: the top half becomes the bottom half and
/// the bottom half becomes minus the top half.
pub fn apply_omega(x: &Matrix) -> Matrix {
    let n = x.rows() / 2;
    Matrix::from_fn(x.rows(), x.cols(), |r, c| {
        if r < n {
            x[(r + n, c)]
        } else {
            -x[(r - n, c)]
        }
    })
}

/// `XΩ_p` for a matrix with `2p` columns.
fn right_omega(x: &Matrix) -> Matrix {
    let p = x.cols() / 2;
    Matrix::from_fn(x.rows(), x.cols(), |r, c| {
        if c < p {
            -x[(r, c + p)]
        } else {
            x[(r, c - p)]
        }
    })
}

fn omega_p(p: usize) -> Matrix {
    Matrix::from_fn(2 * p, 2 * p, |r, c| {
        if c == r + p {
            1.0
        } else if r == c + p {
            -1.0
        } else {
            0.0
        }
    })
}

/// Entry `c` of row `r` of `ΩX`.
#[inline]
fn omega_entry(x: &Matrix, n: usize, r: usize, c: usize) -> f64 {
    if r < n {
        x[(r + n, c)]
    } else {
        -x[(r - n, c)]
    }
}

/// `⟨G_r, (ΩX)_s⟩`.
#[inline]
fn g_dot_omega(x: &Matrix, g: &Matrix, n: usize, r: usize, s: usize) -> f64 {
    if s < n {
        dot(g.row(r), x.row(s + n))
    } else {
        -dot(g.row(r), x.row(s - n))
    }
}

/// Symplectic Stiefel matrices `{X ∈ ℝ^{2n×2p} : XᵀΩ_nX = Ω_p}`.
///
/// Rows `0..n` form the position block and `n..2n` the momentum block. The
/// basis is `E_ij Ω X` with `E_ij = e_i e_jᵀ + e_j e_iᵀ` for `i ≤ j`. Pairs
/// `(i, i + n)` move by a diagonal scaling; all other pairs are exact additive
/// updates because `E_ij Ω` is nilpotent.
#[derive(Clone, Debug)]
pub struct Symplectic {
    n: usize,
    p: usize,
}

impl Symplectic {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        check_dims(Family::Symplectic, p >= 1 && p <= n, "need 1 <= p <= n")?;
        Ok(Self { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    fn pair(&self, l: CoordinateIndex) -> Result<(usize, usize)> {
        match l {
            CoordinateIndex::Pair(i, j) if i <= j && j < 2 * self.n => Ok((i, j)),
            _ => Err(invalid_index(Family::Symplectic, l)),
        }
    }

    /// `θ_ij` without validation.
    #[inline]
    fn theta(&self, x: &Matrix, g: &Matrix, i: usize, j: usize) -> f64 {
        if i == j {
            2.0 * g_dot_omega(x, g, self.n, i, i)
        } else {
            g_dot_omega(x, g, self.n, i, j) + g_dot_omega(x, g, self.n, j, i)
        }
    }

    /// `X + t E_ij Ω X`, or the diagonal scaling when `j = i + n`.
    fn retract_unchecked(&self, x: &mut Matrix, i: usize, j: usize, t: f64) {
        let n = self.n;
        let cols = x.cols();
        if j == i + n {
            let (down, up) = ((-t).exp(), t.exp());
            for v in x.row_mut(i) {
                *v *= down;
            }
            for v in x.row_mut(j) {
                *v *= up;
            }
        } else if i == j {
            let tt = 2.0 * t;
            for c in 0..cols {
                let w = omega_entry(x, n, i, c);
                x[(i, c)] += tt * w;
            }
        } else {
            // Row i reads row j ± n and row j reads row i ± n; neither is i or j here.
            for c in 0..cols {
                let w = omega_entry(x, n, j, c);
                x[(i, c)] += t * w;
            }
            for c in 0..cols {
                let w = omega_entry(x, n, i, c);
                x[(j, c)] += t * w;
            }
        }
    }
}

impl Manifold for Symplectic {
    fn family(&self) -> Family {
        Family::Symplectic
    }

    fn descriptor(&self) -> ManifoldDescriptor {
        ManifoldDescriptor::Symplectic { n: self.n, p: self.p }
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (2 * self.n, 2 * self.p)
    }

    fn feasibility_residual(&self, x: &Matrix) -> Result<f64> {
        x.check_shape(self.ambient_shape())?;
        let r = &x.t_matmul(&apply_omega(x)) - &omega_p(self.p);
        Ok(r.frobenius_norm())
    }

    /// `∇f − ΩXW` where `XᵀXW + WXᵀX = 2 skew(XᵀΩᵀ∇f)`.
    fn riemannian_gradient(&self, x: &Matrix, g: &Matrix) -> Result<Matrix> {
        x.check_shape(self.ambient_shape())?;
        g.check_shape(self.ambient_shape())?;
        let omega_t_g = apply_omega(g).scale(-1.0);
        let rhs = x.t_matmul(&omega_t_g).skew().scale(2.0);
        let w = solve_sym_lyapunov(&x.t_matmul(x), &rhs)?;
        Ok(g - &apply_omega(x).matmul(&w))
    }

    fn basis_size(&self) -> usize {
        let m = 2 * self.n;
        m * (m + 1) / 2
    }

    fn index_at(&self, pos: usize) -> CoordinateIndex {
        let (i, j) = weak_pair_at(2 * self.n, pos);
        CoordinateIndex::Pair(i, j)
    }

    fn check_index(&self, l: CoordinateIndex) -> Result<()> {
        self.pair(l).map(|_| ())
    }

    fn coordinate_derivative(&self, x: &Matrix, g: &Matrix, l: CoordinateIndex) -> Result<f64> {
        let (i, j) = self.pair(l)?;
        Ok(self.theta(x, g, i, j))
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
        self.retract_unchecked(x, i, j, t);
        let touched = if i == j { Touched::Row(i) } else { Touched::Rows(i, j) };
        Ok(RetractInfo {
            touched,
            clamped: false,
        })
    }

    fn full_retract(&self, x: &Matrix, u: &Matrix, t: f64) -> Result<Matrix> {
        symplectic_cayley_retract(x, u, t)
    }

    fn derivative_flops(&self, l: CoordinateIndex) -> u64 {
        let p = self.p as u64;
        match l {
            CoordinateIndex::Pair(i, j) if i == j => 4 * p,
            _ => 8 * p,
        }
    }

    fn update_flops(&self, l: CoordinateIndex) -> u64 {
        let p = self.p as u64;
        match l {
            CoordinateIndex::Pair(i, j) if i == j || j == i + self.n => 4 * p,
            _ => 8 * p,
        }
    }

    fn scalar_flops(&self, l: CoordinateIndex) -> u64 {
        match l {
            CoordinateIndex::Pair(i, j) if j == i + self.n => 2 + 2 * TRANSCENDENTAL_FLOPS,
            CoordinateIndex::Pair(i, j) if i == j => 3,
            _ => 2,
        }
    }

    fn full_step_flops(&self) -> u64 {
        let (m, q) = (2 * self.n as u64, 2 * self.p as u64);
        // XᵀΩᵀG, XᵀX, the eigen-based Lyapunov solve (Jacobi counted as 10 sweeps)
        // and ΩXW.
        let gradient = 2 * m * q * q + 2 * m * q * q + 10 * 6 * q * q * q + 6 * q * q * q + 2 * m * q * q + m * q;
        // S from G_X U, the two Cayley factors and an LU solve against X.
        let cayley = 6 * m * m * q + 4 * m * q * q + 2 * m * m * m + 2 * m * m * m / 3 + 4 * m * m * q;
        gradient + cayley
    }

    fn random_point(&self, rng: &mut Rng) -> Matrix {
        let mut x = symplectic_identity(self.n, self.p);
        for _ in 0..2 * self.basis_size() {
            let pos = rng.index(self.basis_size());
            let (i, j) = weak_pair_at(2 * self.n, pos);
            let t = rng.uniform(-0.1, 0.1);
            self.retract_unchecked(&mut x, i, j, t);
        }
        x
    }

    fn materialize_basis(&self, x: &Matrix, l: CoordinateIndex) -> Result<Matrix> {
        let (i, j) = self.pair(l)?;
        let ox = apply_omega(x);
        let mut b = Matrix::zeros(2 * self.n, 2 * self.p);
        if i == j {
            for (d, s) in b.row_mut(i).iter_mut().zip(ox.row(i)) {
                *d = 2.0 * s;
            }
        } else {
            b.row_mut(i).copy_from_slice(ox.row(j));
            b.row_mut(j).copy_from_slice(ox.row(i));
        }
        Ok(b)
    }
}

/// The canonical starting point: columns `e_0..e_p` and `e_n..e_{n+p}` of `I_{2n}`.
pub fn symplectic_identity(n: usize, p: usize) -> Matrix {
    let mut x = Matrix::zeros(2 * n, 2 * p);
    for k in 0..p {
        x[(k, k)] = 1.0;
        x[(n + k, p + k)] = 1.0;
    }
    x
}

/// One symplectic coordinate step on pair `(i, j)`, `i ≤ j < 2n`.
pub fn symplectic_coordinate_step(
    x: &Matrix,
    i: usize,
    j: usize,
    eta: f64,
    g: &Matrix,
) -> Result<(Matrix, CoordinateStepReport)> {
    if !x.rows().is_multiple_of(2) || !x.cols().is_multiple_of(2) {
        return Err(Error::InvalidArgument("symplectic iterate needs even dimensions".into()));
    }
    let m = Symplectic::new(x.rows() / 2, x.cols() / 2)?;
    let mut out = x.clone();
    let report = m.coordinate_step(&mut out, g, CoordinateIndex::Pair(i, j), eta)?;
    Ok((out, report))
}

/// A block of coordinates updated together.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymplecticBlock {
    /// All pairs `i ≤ j < n`.
    UpperLeft,
    /// All pairs `n ≤ i ≤ j`.
    LowerRight,
    /// The pairs `(i, i + n)`.
    DiagCross,
}

impl SymplecticBlock {
    pub const ALL: [SymplecticBlock; 3] = [
        SymplecticBlock::UpperLeft,
        SymplecticBlock::LowerRight,
        SymplecticBlock::DiagCross,
    ];
}

/// Coefficient matrix `E = Σ θ_ij E_ij` over a corner block, returned as the
/// `n×n` symmetric block itself.
fn corner_coefficients(x: &Matrix, g: &Matrix, n: usize, upper: bool) -> Matrix {
    // θ_ij = M_ij + M_ji with M = G_top X_botᵀ (upper) or −G_bot X_topᵀ (lower).
    let (gs, xs, sign) = if upper { (0, n, 1.0) } else { (n, 0, -1.0) };
    let m = Matrix::from_fn(n, n, |i, j| sign * dot(g.row(gs + i), x.row(xs + j)));
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            4.0 * m[(i, i)]
        } else {
            m[(i, j)] + m[(j, i)]
        }
    })
}

/// Coordinate derivatives `θ_{i,i+n}` for `i < n`.
fn cross_coefficients(x: &Matrix, g: &Matrix, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| dot(g.row(n + i), x.row(n + i)) - dot(g.row(i), x.row(i)))
        .collect()
}

/// `diag(exp(−t·u), exp(t·v)) X`. Symplectic only for `u = v`.
pub fn symplectic_diag_cross_retract(x: &Matrix, u: &[f64], v: &[f64], t: f64) -> Result<Matrix> {
    let n = x.rows() / 2;
    if u.len() != n || v.len() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, 1),
            found: (u.len(), v.len()),
        });
    }
    if u != v {
        return Err(Error::InvalidArgument(
            "diagonal cross block needs u = v to stay symplectic".into(),
        ));
    }
    let mut out = x.clone();
    if t == 0.0 {
        return Ok(out);
    }
    for i in 0..n {
        if u[i] == 0.0 {
            continue;
        }
        let (down, up) = ((-t * u[i]).exp(), (t * v[i]).exp());
        for w in out.row_mut(i) {
            *w *= down;
        }
        for w in out.row_mut(n + i) {
            *w *= up;
        }
    }
    Ok(out)
}

/// Updates a whole block of coordinates at once with stepsize `eta`.
///
/// Corner blocks move by the exact additive update `X − η E Ω X` with `E` the
/// matrix of coordinate derivatives over the block. The cross block scales
/// rows `i` and `i + n` by `exp(±η θ_{i,i+n})`.
pub fn symplectic_block_step(x: &Matrix, block: SymplecticBlock, eta: f64, g: &Matrix) -> Result<Matrix> {
    let mut out = x.clone();
    symplectic_block_step_in_place(&mut out, block, eta, g)?;
    Ok(out)
}

/// In-place form of [`symplectic_block_step`]; returns the Frobenius norm of
/// the block's coordinate derivatives.
pub(crate) fn symplectic_block_step_in_place(
    x: &mut Matrix,
    block: SymplecticBlock,
    eta: f64,
    g: &Matrix,
) -> Result<f64> {
    g.check_shape(x.shape())?;
    if !x.rows().is_multiple_of(2) {
        return Err(Error::InvalidArgument("symplectic iterate needs an even row count".into()));
    }
    let n = x.rows() / 2;
    match block {
        SymplecticBlock::UpperLeft | SymplecticBlock::LowerRight => {
            let upper = block == SymplecticBlock::UpperLeft;
            let e = corner_coefficients(x, g, n, upper);
            let norm = e.frobenius_norm();
            if eta == 0.0 || norm == 0.0 {
                return Ok(norm);
            }
            // Upper: (EΩX)_top = E X_bot. Lower: (EΩX)_bot = −E X_top. The
            // source half is never written, so the update can run in place.
            let (dst, src, sign) = if upper { (0, n, -eta) } else { (n, 0, eta) };
            for i in 0..n {
                for k in 0..n {
                    let coef = sign * e[(i, k)];
                    if coef == 0.0 {
                        continue;
                    }
                    for c in 0..x.cols() {
                        let v = x[(src + k, c)];
                        x[(dst + i, c)] += coef * v;
                    }
                }
            }
            Ok(norm)
        }
        SymplecticBlock::DiagCross => {
            let u = cross_coefficients(x, g, n);
            let norm = dot(&u, &u).sqrt();
            if eta != 0.0 && norm != 0.0 {
                *x = symplectic_diag_cross_retract(x, &u, &u, -eta)?;
            }
            Ok(norm)
        }
    }
}

/// Flops of [`symplectic_block_step`] for a `2n×2p` iterate.
pub fn symplectic_block_flops(block: SymplecticBlock, n: usize, p: usize) -> FlopCount {
    let (n, p) = (n as u64, p as u64);
    match block {
        // M = G X_halfᵀ and its symmetrization, then E times the other half.
        SymplecticBlock::UpperLeft | SymplecticBlock::LowerRight => FlopCount {
            derivative: 4 * n * n * p + n * n + n,
            update: 4 * n * n * p + n * n,
            scalar: 0,
        },
        SymplecticBlock::DiagCross => FlopCount {
            derivative: 8 * n * p + n,
            update: 4 * n * p,
            scalar: n * (2 + 2 * TRANSCENDENTAL_FLOPS),
        },
    }
}

/// Symplectic Cayley retraction `(I − t/2·SΩ)⁻¹(I + t/2·SΩ)X` with
/// `S = G_X U (XΩ_p)ᵀ + XΩ_p (G_X U)ᵀ` and `G_X = I − ½XΩ_pXᵀΩᵀ`.
pub fn symplectic_cayley_retract(x: &Matrix, u: &Matrix, t: f64) -> Result<Matrix> {
    u.check_shape(x.shape())?;
    if t == 0.0 {
        return Ok(x.clone());
    }
    let m = x.rows();
    let y = right_omega(x);
    // G_X U = U − ½ X Ω_p (XᵀΩᵀU), with ΩᵀU = −ΩU.
    let xt_omt_u = x.t_matmul(&apply_omega(u)).scale(-1.0);
    let gu = u - &y.matmul(&xt_omt_u).scale(0.5);
    let s = &gu.matmul_t(&y) + &y.matmul_t(&gu);
    // SΩ: column c of SΩ is column c − n of S for c ≥ n, minus column c + n otherwise.
    let n = m / 2;
    let s_omega = Matrix::from_fn(m, m, |r, c| if c < n { -s[(r, c + n)] } else { s[(r, c - n)] });
    let half = 0.5 * t;
    let lhs = Matrix::from_fn(m, m, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        id - half * s_omega[(r, c)]
    });
    let rhs_op = Matrix::from_fn(m, m, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        id + half * s_omega[(r, c)]
    });
    Lu::factor(&lhs, CAYLEY_PIVOT_TOL)?.solve(&rhs_op.matmul(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_pair_on_identity() {
        let m = Symplectic::new(1, 1).unwrap();
        let x = Matrix::identity(2);
        for t in [0.3, -1.2, 2.5] {
            let (y, _) = m.coordinate_retract(&x, CoordinateIndex::Pair(0, 1), t).unwrap();
            assert_eq!(y, Matrix::diag(&[(-t).exp(), t.exp()]));
            assert!(m.feasibility_residual(&y).unwrap() < 1e-15);
        }
    }

    #[test]
    fn enumeration_small() {
        let m = Symplectic::new(1, 1).unwrap();
        assert_eq!(
            m.enumerate_basis(),
            vec![
                CoordinateIndex::Pair(0, 0),
                CoordinateIndex::Pair(0, 1),
                CoordinateIndex::Pair(1, 1)
            ]
        );
    }

    #[test]
    fn identity_point_is_feasible() {
        let m = Symplectic::new(3, 2).unwrap();
        assert_eq!(m.feasibility_residual(&symplectic_identity(3, 2)).unwrap(), 0.0);
    }

    #[test]
    fn cross_block_rejects_mismatched_weights() {
        let x = symplectic_identity(2, 1);
        assert!(symplectic_diag_cross_retract(&x, &[1.0, 0.0], &[0.0, 1.0], 0.1).is_err());
        let same = symplectic_diag_cross_retract(&x, &[0.0, 0.0], &[0.0, 0.0], 0.7).unwrap();
        assert!(same.bit_eq(&x));
    }
}
