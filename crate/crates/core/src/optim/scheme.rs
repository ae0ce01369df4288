use crate::dense::{Matrix, Rotation};
use crate::error::Result;
use crate::manifold::{
    strict_pair_at, CoordinateIndex, CoordinateStepReport, Family, FlopCount, Manifold, Touched,
    THETA_SKIP,
};
use crate::rotational::{
    lorentz_pair_derivative, symplectic_block_flops, symplectic_block_step_in_place, Hyperbolic,
    Stiefel, Symplectic, SymplecticBlock, Tsd,
};

/// What the optimizers need from a coordinate system: an indexed family of
/// cheap updates plus the full-gradient machinery for logging and RGD.
pub trait CoordinateScheme: Send + Sync {
    fn label(&self) -> String;

    fn shape(&self) -> (usize, usize);

    fn index_count(&self) -> usize;

    /// One coordinate step on position `pos` in place.
    fn step(&self, x: &mut Matrix, g: &Matrix, pos: usize, eta: f64) -> Result<CoordinateStepReport>;

    fn feasibility(&self, x: &Matrix) -> Result<f64>;

    fn gradient_norm(&self, x: &Matrix, g: &Matrix) -> Result<f64>;

    /// `Retr_X(−η grad f(X))`.
    fn full_step(&self, x: &Matrix, g: &Matrix, eta: f64) -> Result<Matrix>;

    fn full_step_flops(&self) -> u64;

    fn time_cyclic_positions(&self) -> Option<Vec<usize>> {
        None
    }

    /// Row count `n` when the positions are exactly the strict row pairs of
    /// `n` rows in enumeration order.
    fn pair_rows(&self) -> Option<usize> {
        None
    }

    /// The step at `pos` as a left rotation computed from the current rows,
    /// without applying it. `None` when the step is not a row rotation.
    fn plan_rotation(&self, _x: &Matrix, _g: &Matrix, _pos: usize, _eta: f64) -> Option<Result<(Rotation, CoordinateStepReport)>> {
        None
    }

    fn epoch_probe(&self, _x: &Matrix) -> bool {
        true
    }

    fn renormalize(&self, _x: &mut Matrix) -> Result<()> {
        Ok(())
    }
}

fn skipped_report(theta: f64, derivative: u64) -> CoordinateStepReport {
    CoordinateStepReport {
        theta,
        flops: FlopCount {
            derivative,
            update: 0,
            scalar: 0,
        },
        touched: Touched::Nothing,
        clamped: false,
        skipped: true,
    }
}

#[inline]
fn negligible(theta: f64, eta: f64) -> bool {
    theta.abs() < THETA_SKIP || eta == 0.0 || !theta.is_finite()
}

#[derive(Debug)]
enum Held<'a> {
    Borrowed(&'a dyn Manifold),
    Owned(Box<dyn Manifold>),
}

/// The coordinate basis of a [`Manifold`].
#[derive(Debug)]
pub struct ManifoldCoordinates<'a> {
    held: Held<'a>,
    basis: Vec<CoordinateIndex>,
}

impl<'a> ManifoldCoordinates<'a> {
    pub fn new(m: &'a dyn Manifold) -> Self {
        Self {
            basis: m.enumerate_basis(),
            held: Held::Borrowed(m),
        }
    }

    pub fn manifold(&self) -> &dyn Manifold {
        match &self.held {
            Held::Borrowed(m) => *m,
            Held::Owned(m) => m.as_ref(),
        }
    }

    pub fn index(&self, pos: usize) -> CoordinateIndex {
        self.basis[pos]
    }
}

impl ManifoldCoordinates<'static> {
    pub fn owned(m: Box<dyn Manifold>) -> Self {
        Self {
            basis: m.enumerate_basis(),
            held: Held::Owned(m),
        }
    }
}

impl CoordinateScheme for ManifoldCoordinates<'_> {
    fn label(&self) -> String {
        self.manifold().family().name().to_string()
    }

    fn shape(&self) -> (usize, usize) {
        self.manifold().ambient_shape()
    }

    fn index_count(&self) -> usize {
        self.basis.len()
    }

    fn step(&self, x: &mut Matrix, g: &Matrix, pos: usize, eta: f64) -> Result<CoordinateStepReport> {
        self.manifold().coordinate_step(x, g, self.basis[pos], eta)
    }

    fn feasibility(&self, x: &Matrix) -> Result<f64> {
        self.manifold().feasibility_residual(x)
    }

    fn gradient_norm(&self, x: &Matrix, g: &Matrix) -> Result<f64> {
        let u = self.manifold().riemannian_gradient(x, g)?;
        Ok(self.manifold().metric_norm(x, &u))
    }

    fn full_step(&self, x: &Matrix, g: &Matrix, eta: f64) -> Result<Matrix> {
        let u = self.manifold().riemannian_gradient(x, g)?;
        self.manifold().full_retract(x, &u, -eta)
    }

    fn full_step_flops(&self) -> u64 {
        self.manifold().full_step_flops()
    }

    fn time_cyclic_positions(&self) -> Option<Vec<usize>> {
        self.manifold().time_cyclic_positions()
    }

    fn pair_rows(&self) -> Option<usize> {
        match self.manifold().family() {
            Family::Stiefel | Family::Grassmann | Family::Hyperbolic => Some(self.manifold().ambient_shape().0),
            _ => None,
        }
    }

    fn plan_rotation(&self, x: &Matrix, g: &Matrix, pos: usize, eta: f64) -> Option<Result<(Rotation, CoordinateStepReport)>> {
        let l = self.basis[pos];
        let (i, j, kind) = self.manifold().rotation_for(l)?;
        Some((|| {
            let theta = self.manifold().coordinate_derivative(x, g, l)?;
            if negligible(theta, eta) {
                let rot = Rotation { i, j, theta: 0.0, kind };
                return Ok((rot, skipped_report(theta, self.manifold().derivative_flops(l))));
            }
            let rot = Rotation {
                i,
                j,
                theta: self.manifold().step_parameter(theta, eta),
                kind,
            };
            let report = CoordinateStepReport {
                theta,
                flops: FlopCount {
                    derivative: self.manifold().derivative_flops(l),
                    update: self.manifold().update_flops(l),
                    scalar: self.manifold().scalar_flops(l),
                },
                touched: Touched::Rows(i, j),
                clamped: false,
                skipped: false,
            };
            Ok((rot, report))
        })())
    }

    fn epoch_probe(&self, x: &Matrix) -> bool {
        self.manifold().epoch_probe(x)
    }

    fn renormalize(&self, x: &mut Matrix) -> Result<()> {
        self.manifold().renormalize(x)
    }
}

/// Column-wise Stiefel coordinates: column pairs, then single columns.
#[derive(Debug)]
pub struct TsdScheme {
    tsd: Tsd,
    stiefel: Stiefel,
}

impl TsdScheme {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        Ok(Self {
            tsd: Tsd::new(n, p)?,
            stiefel: Stiefel::new(n, p)?,
        })
    }
}

impl CoordinateScheme for TsdScheme {
    fn label(&self) -> String {
        "tsd".into()
    }

    fn shape(&self) -> (usize, usize) {
        self.tsd.shape()
    }

    fn index_count(&self) -> usize {
        self.tsd.index_count()
    }

    fn step(&self, x: &mut Matrix, g: &Matrix, pos: usize, eta: f64) -> Result<CoordinateStepReport> {
        self.tsd.step(x, g, self.tsd.index_at(pos), eta)
    }

    fn feasibility(&self, x: &Matrix) -> Result<f64> {
        self.stiefel.feasibility_residual(x)
    }

    fn gradient_norm(&self, x: &Matrix, g: &Matrix) -> Result<f64> {
        Ok(self.stiefel.riemannian_gradient(x, g)?.frobenius_norm())
    }

    fn full_step(&self, x: &Matrix, g: &Matrix, eta: f64) -> Result<Matrix> {
        let u = self.stiefel.riemannian_gradient(x, g)?;
        self.stiefel.full_retract(x, &u, -eta)
    }

    fn full_step_flops(&self) -> u64 {
        self.stiefel.full_step_flops()
    }

    fn renormalize(&self, x: &mut Matrix) -> Result<()> {
        self.stiefel.renormalize(x)
    }
}

/// Symplectic coordinates with the two symmetric corner blocks and the
/// diagonal cross block each updated as one coordinate.
///
/// Positions `0, 1, 2` are the upper-left, lower-right and diagonal cross
/// blocks; the rest are the single pairs `(i, n + j)` with `i ≠ j`.
#[derive(Debug)]
pub struct SymplecticBlockScheme {
    m: Symplectic,
}

impl SymplecticBlockScheme {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        Ok(Self {
            m: Symplectic::new(n, p)?,
        })
    }

    fn cross_pair(&self, pos: usize) -> CoordinateIndex {
        let n = self.m.n();
        let q = pos - SymplecticBlock::ALL.len();
        let (i, r) = (q / (n - 1), q % (n - 1));
        let j = if r >= i { r + 1 } else { r };
        CoordinateIndex::Pair(i, n + j)
    }
}

impl CoordinateScheme for SymplecticBlockScheme {
    fn label(&self) -> String {
        "symplectic-block".into()
    }

    fn shape(&self) -> (usize, usize) {
        self.m.ambient_shape()
    }

    fn index_count(&self) -> usize {
        let n = self.m.n();
        SymplecticBlock::ALL.len() + n * (n - 1)
    }

    fn step(&self, x: &mut Matrix, g: &Matrix, pos: usize, eta: f64) -> Result<CoordinateStepReport> {
        if let Some(&block) = SymplecticBlock::ALL.get(pos) {
            let norm = symplectic_block_step_in_place(x, block, eta, g)?;
            let flops = symplectic_block_flops(block, self.m.n(), self.m.p());
            if negligible(norm, eta) {
                return Ok(skipped_report(norm, flops.derivative));
            }
            return Ok(CoordinateStepReport {
                theta: norm,
                flops,
                touched: Touched::All,
                clamped: false,
                skipped: false,
            });
        }
        self.m.coordinate_step(x, g, self.cross_pair(pos), eta)
    }

    fn feasibility(&self, x: &Matrix) -> Result<f64> {
        self.m.feasibility_residual(x)
    }

    fn gradient_norm(&self, x: &Matrix, g: &Matrix) -> Result<f64> {
        Ok(self.m.riemannian_gradient(x, g)?.frobenius_norm())
    }

    fn full_step(&self, x: &Matrix, g: &Matrix, eta: f64) -> Result<Matrix> {
        let u = self.m.riemannian_gradient(x, g)?;
        self.m.full_retract(x, &u, -eta)
    }

    fn full_step_flops(&self) -> u64 {
        self.m.full_step_flops()
    }
}

/// A product of hyperboloids `ℋ(n, 1)`, one per row of an `N×n` matrix with
/// the time coordinate in column 0.
///
/// Position `w·P + q` is pair `q` of the `P = n(n−1)/2` pairs of point `w`.
#[derive(Debug)]
pub struct LorentzProduct {
    points: usize,
    dim: usize,
    single: Hyperbolic,
}

impl LorentzProduct {
    pub fn new(points: usize, dim: usize) -> Result<Self> {
        let single = Hyperbolic::new(dim, 1)?;
        Ok(Self { points, dim, single })
    }

    fn pairs(&self) -> usize {
        self.dim * (self.dim - 1) / 2
    }

    fn locate(&self, pos: usize) -> (usize, usize, usize) {
        let (w, q) = (pos / self.pairs(), pos % self.pairs());
        let (i, j) = strict_pair_at(self.dim, q);
        (w, i, j)
    }

    fn row_column(x: &Matrix, w: usize) -> Matrix {
        Matrix::from_vec(x.cols(), 1, x.row(w).to_vec()).expect("length matches")
    }

    /// `−⟨x, y⟩_L` for two points stored as rows.
    pub fn minus_lorentz(x: &[f64], y: &[f64]) -> f64 {
        x[0] * y[0] - crate::dense::dot(&x[1..], &y[1..])
    }
}

impl CoordinateScheme for LorentzProduct {
    fn label(&self) -> String {
        "lorentz-product".into()
    }

    fn shape(&self) -> (usize, usize) {
        (self.points, self.dim)
    }

    fn index_count(&self) -> usize {
        self.points * self.pairs()
    }

    fn step(&self, x: &mut Matrix, g: &Matrix, pos: usize, eta: f64) -> Result<CoordinateStepReport> {
        let (w, i, j) = self.locate(pos);
        let si = if i == 0 { -1.0 } else { 1.0 };
        let theta = lorentz_pair_derivative(
            &g.row(w)[i..=i],
            &g.row(w)[j..=j],
            &x.row(w)[i..=i],
            &x.row(w)[j..=j],
            si,
            1.0,
        );
        if negligible(theta, eta) {
            return Ok(skipped_report(theta, 4));
        }
        let t = -eta * theta;
        let (a, b) = (x[(w, i)], x[(w, j)]);
        if i == 0 {
            let (c, s) = (t.cosh(), t.sinh());
            x[(w, i)] = c * a + s * b;
            x[(w, j)] = s * a + c * b;
        } else {
            let (s, c) = t.sin_cos();
            x[(w, i)] = c * a + s * b;
            x[(w, j)] = c * b - s * a;
        }
        Ok(CoordinateStepReport {
            theta,
            flops: FlopCount {
                derivative: 4,
                update: 6,
                scalar: 18,
            },
            touched: Touched::Entry(w, i),
            clamped: false,
            skipped: false,
        })
    }

    fn feasibility(&self, x: &Matrix) -> Result<f64> {
        x.check_shape(self.shape())?;
        Ok((0..self.points)
            .map(|w| (Self::minus_lorentz(x.row(w), x.row(w)) - 1.0).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    fn gradient_norm(&self, x: &Matrix, g: &Matrix) -> Result<f64> {
        let mut total = 0.0;
        for w in 0..self.points {
            let u = self.single.riemannian_gradient(&Self::row_column(x, w), &Self::row_column(g, w))?;
            total += self.single.lorentz_inner(&u, &u).abs();
        }
        Ok(total.sqrt())
    }

    fn full_step(&self, x: &Matrix, g: &Matrix, eta: f64) -> Result<Matrix> {
        let mut out = x.clone();
        for w in 0..self.points {
            let xc = Self::row_column(x, w);
            let u = self.single.riemannian_gradient(&xc, &Self::row_column(g, w))?;
            let y = self.single.full_retract(&xc, &u, -eta)?;
            out.row_mut(w).copy_from_slice(y.as_slice());
        }
        Ok(out)
    }

    fn full_step_flops(&self) -> u64 {
        self.points as u64 * self.single.full_step_flops()
    }

    fn time_cyclic_positions(&self) -> Option<Vec<usize>> {
        let per = self.single.time_space_positions();
        Some(
            (0..self.points)
                .flat_map(|w| per.iter().map(move |q| w * self.pairs() + q))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_scheme_positions() {
        let s = SymplecticBlockScheme::new(3, 2).unwrap();
        assert_eq!(s.index_count(), 9);
        let cross: Vec<_> = (3..9).map(|p| s.cross_pair(p)).collect();
        assert_eq!(
            cross,
            vec![
                CoordinateIndex::Pair(0, 4),
                CoordinateIndex::Pair(0, 5),
                CoordinateIndex::Pair(1, 3),
                CoordinateIndex::Pair(1, 5),
                CoordinateIndex::Pair(2, 3),
                CoordinateIndex::Pair(2, 4),
            ]
        );
    }

    #[test]
    fn lorentz_time_positions() {
        let s = LorentzProduct::new(2, 3).unwrap();
        assert_eq!(s.time_cyclic_positions().unwrap(), vec![0, 1, 3, 4]);
    }
}
