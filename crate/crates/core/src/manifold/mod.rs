//! The contract shared by every manifold family.

pub mod flops;

use std::fmt;

use crate::dense::{Matrix, RotationKind};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub use flops::{FlopCount, SINKHORN_2X2_FLOPS, TRANSCENDENTAL_FLOPS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Stiefel,
    Grassmann,
    Hyperbolic,
    Symplectic,
    DoublyStochastic,
    Multinomial,
    SpsdFactored,
    SpdBuresWasserstein,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Stiefel => "stiefel",
            Family::Grassmann => "grassmann",
            Family::Hyperbolic => "hyperbolic",
            Family::Symplectic => "symplectic",
            Family::DoublyStochastic => "doubly-stochastic",
            Family::Multinomial => "multinomial",
            Family::SpsdFactored => "spsd-factored",
            Family::SpdBuresWasserstein => "spd-bw",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A basis label `ℓ` of the tangent space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoordinateIndex {
    Pair(usize, usize),
    Entry(usize, usize),
    Column(usize),
}

impl fmt::Display for CoordinateIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordinateIndex::Pair(i, j) => write!(f, "pair({i}, {j})"),
            CoordinateIndex::Entry(i, j) => write!(f, "entry({i}, {j})"),
            CoordinateIndex::Column(k) => write!(f, "column({k})"),
        }
    }
}

/// Which entries of the iterate a coordinate update may modify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Touched {
    Nothing,
    Row(usize),
    Rows(usize, usize),
    Columns(usize, usize),
    Column(usize),
    Entry(usize, usize),
    /// Two adjacent entries `(i, j)` and `(i, j + 1)`.
    RowSegment { row: usize, col: usize },
    /// The 2×2 block with top-left corner `(row, col)`.
    Block2 { row: usize, col: usize },
    /// Rows `i`, `j` and columns `i`, `j` of a square matrix.
    Cross(usize, usize),
    All,
}

impl Touched {
    /// Whether entry `(r, c)` may differ after the update.
    pub fn contains(&self, r: usize, c: usize) -> bool {
        match *self {
            Touched::Nothing => false,
            Touched::Row(i) => r == i,
            Touched::Rows(i, j) => r == i || r == j,
            Touched::Columns(i, j) => c == i || c == j,
            Touched::Column(k) => c == k,
            Touched::Entry(i, j) => r == i && c == j,
            Touched::RowSegment { row, col } => r == row && (c == col || c == col + 1),
            Touched::Block2 { row, col } => (r == row || r == row + 1) && (c == col || c == col + 1),
            Touched::Cross(i, j) => r == i || r == j || c == i || c == j,
            Touched::All => true,
        }
    }
}

/// Outcome of a coordinate retraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RetractInfo {
    pub touched: Touched,
    /// The exponent was limited to keep entries positive.
    pub clamped: bool,
}

impl RetractInfo {
    pub const IDENTITY: RetractInfo = RetractInfo {
        touched: Touched::Nothing,
        clamped: false,
    };
}

/// Outcome of one coordinate descent step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordinateStepReport {
    pub theta: f64,
    pub flops: FlopCount,
    pub touched: Touched,
    pub clamped: bool,
    /// `|θ|` was negligible and the retraction was not evaluated.
    pub skipped: bool,
}

/// Below this magnitude a coordinate derivative is treated as zero.
pub const THETA_SKIP: f64 = 1e-300;

/// Immutable description of a manifold instance.
#[derive(Clone, Debug, PartialEq)]
pub enum ManifoldDescriptor {
    Stiefel { n: usize, p: usize },
    Grassmann { n: usize, p: usize },
    Hyperbolic { n: usize, p: usize },
    /// Ambient shape `2n × 2p`.
    Symplectic { n: usize, p: usize },
    DoublyStochastic { mu: Vec<f64>, nu: Vec<f64> },
    Multinomial { n: usize, p: usize },
    SpsdFactored { n: usize, p: usize },
    SpdBuresWasserstein { n: usize },
}

impl ManifoldDescriptor {
    pub fn family(&self) -> Family {
        match self {
            ManifoldDescriptor::Stiefel { .. } => Family::Stiefel,
            ManifoldDescriptor::Grassmann { .. } => Family::Grassmann,
            ManifoldDescriptor::Hyperbolic { .. } => Family::Hyperbolic,
            ManifoldDescriptor::Symplectic { .. } => Family::Symplectic,
            ManifoldDescriptor::DoublyStochastic { .. } => Family::DoublyStochastic,
            ManifoldDescriptor::Multinomial { .. } => Family::Multinomial,
            ManifoldDescriptor::SpsdFactored { .. } => Family::SpsdFactored,
            ManifoldDescriptor::SpdBuresWasserstein { .. } => Family::SpdBuresWasserstein,
        }
    }

    /// Validates the dimensions and builds the manifold.
    pub fn build(&self) -> Result<Box<dyn Manifold>> {
        use crate::elementwise::{DoublyStochastic, Multinomial, SpdBuresWasserstein, SpsdFactored};
        use crate::rotational::{Grassmann, Hyperbolic, Stiefel, Symplectic};
        Ok(match self {
            ManifoldDescriptor::Stiefel { n, p } => Box::new(Stiefel::new(*n, *p)?),
            ManifoldDescriptor::Grassmann { n, p } => Box::new(Grassmann::new(*n, *p)?),
            ManifoldDescriptor::Hyperbolic { n, p } => Box::new(Hyperbolic::new(*n, *p)?),
            ManifoldDescriptor::Symplectic { n, p } => Box::new(Symplectic::new(*n, *p)?),
            ManifoldDescriptor::DoublyStochastic { mu, nu } => {
                Box::new(DoublyStochastic::new(mu.clone(), nu.clone())?)
            }
            ManifoldDescriptor::Multinomial { n, p } => Box::new(Multinomial::new(*n, *p)?),
            ManifoldDescriptor::SpsdFactored { n, p } => Box::new(SpsdFactored::new(*n, *p)?),
            ManifoldDescriptor::SpdBuresWasserstein { n } => Box::new(SpdBuresWasserstein::new(*n)?),
        })
    }
}

/// Dimension check shared by the `new` constructors.
pub(crate) fn check_dims(family: Family, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{family}: {what}")))
    }
}

/// A matrix manifold with a coordinate basis of its tangent spaces.
///
/// Coordinates are enumerated in a fixed row-major order by [`Manifold::index_at`].
/// Derivatives are computed from the few rows or entries the basis element
/// touches, never by materializing it.
pub trait Manifold: Send + Sync + fmt::Debug {
    fn family(&self) -> Family;

    fn descriptor(&self) -> ManifoldDescriptor;

    fn ambient_shape(&self) -> (usize, usize);

    /// Frobenius norm of the constraint violation at `x`.
    fn feasibility_residual(&self, x: &Matrix) -> Result<f64>;

    /// Riemannian gradient at `x` from the Euclidean gradient `g`.
    fn riemannian_gradient(&self, x: &Matrix, g: &Matrix) -> Result<Matrix>;

    /// Norm of a tangent vector under the manifold's metric.
    fn metric_norm(&self, _x: &Matrix, u: &Matrix) -> f64 {
        u.frobenius_norm()
    }

    /// `|𝓘|`.
    fn basis_size(&self) -> usize;

    /// The coordinate at position `pos` of the enumeration order.
    fn index_at(&self, pos: usize) -> CoordinateIndex;

    fn enumerate_basis(&self) -> Vec<CoordinateIndex> {
        (0..self.basis_size()).map(|k| self.index_at(k)).collect()
    }

    fn check_index(&self, l: CoordinateIndex) -> Result<()>;

    /// `θ = ⟨G, B_ℓ⟩` in closed form.
    fn coordinate_derivative(&self, x: &Matrix, g: &Matrix, l: CoordinateIndex) -> Result<f64>;

    /// Moves `x` along the curve `t ↦ Retr_X(t·B_ℓ)` in place. `t = 0` leaves
    /// `x` bitwise unchanged.
    fn coordinate_retract_in_place(
        &self,
        x: &mut Matrix,
        l: CoordinateIndex,
        t: f64,
    ) -> Result<RetractInfo>;

    fn coordinate_retract(
        &self,
        x: &Matrix,
        l: CoordinateIndex,
        t: f64,
    ) -> Result<(Matrix, RetractInfo)> {
        let mut out = x.clone();
        let info = self.coordinate_retract_in_place(&mut out, l, t)?;
        Ok((out, info))
    }

    /// Retraction parameter used for a step of size `eta` against derivative `theta`.
    fn step_parameter(&self, theta: f64, eta: f64) -> f64 {
        -eta * theta
    }

    /// One coordinate descent step `X ← Retr_X(−ηθ B_ℓ)` in place.
    fn coordinate_step(
        &self,
        x: &mut Matrix,
        g: &Matrix,
        l: CoordinateIndex,
        eta: f64,
    ) -> Result<CoordinateStepReport> {
        let theta = self.coordinate_derivative(x, g, l)?;
        let mut flops = FlopCount {
            derivative: self.derivative_flops(l),
            update: 0,
            scalar: 0,
        };
        if theta.abs() < THETA_SKIP || eta == 0.0 || !theta.is_finite() {
            return Ok(CoordinateStepReport {
                theta,
                flops,
                touched: Touched::Nothing,
                clamped: false,
                skipped: true,
            });
        }
        let t = self.step_parameter(theta, eta);
        let info = self.coordinate_retract_in_place(x, l, t)?;
        flops.update = self.update_flops(l);
        flops.scalar = self.scalar_flops(l);
        Ok(CoordinateStepReport {
            theta,
            flops,
            touched: info.touched,
            clamped: info.clamped,
            skipped: false,
        })
    }

    /// `Retr_X(t·U)` for a full tangent vector `U`, used by the RGD baseline.
    fn full_retract(&self, x: &Matrix, u: &Matrix, t: f64) -> Result<Matrix>;

    fn derivative_flops(&self, l: CoordinateIndex) -> u64;

    fn update_flops(&self, l: CoordinateIndex) -> u64;

    /// Scalar overhead of a step (angle, transcendental coefficients).
    fn scalar_flops(&self, l: CoordinateIndex) -> u64;

    /// `δ`: derivative plus update cost of one coordinate step.
    fn flop_cost(&self, l: CoordinateIndex) -> u64 {
        self.derivative_flops(l) + self.update_flops(l)
    }

    /// Riemannian gradient plus full retraction, excluding the gradient oracle.
    fn full_step_flops(&self) -> u64;

    /// If the coordinate update for `l` is a left rotation of two rows, its
    /// row pair and kind. Used to run disjoint updates as one batch.
    fn rotation_for(&self, _l: CoordinateIndex) -> Option<(usize, usize, RotationKind)> {
        None
    }

    /// Basis positions visited by time-cyclic selection, for families that have them.
    fn time_cyclic_positions(&self) -> Option<Vec<usize>> {
        None
    }

    /// Health check run once per epoch; `false` makes the optimizer retry the
    /// epoch with a halved stepsize.
    fn epoch_probe(&self, _x: &Matrix) -> bool {
        true
    }

    /// Pulls a drifted iterate back onto the manifold. Off by default in the optimizers.
    fn renormalize(&self, _x: &mut Matrix) -> Result<()> {
        Ok(())
    }

    /// A random feasible point, for tests and benchmarks.
    fn random_point(&self, rng: &mut Rng) -> Matrix;

    /// Explicit `B_ℓ` at `x`. Test utility only.
    #[doc(hidden)]
    fn materialize_basis(&self, x: &Matrix, l: CoordinateIndex) -> Result<Matrix>;
}

pub(crate) fn invalid_index(family: Family, l: CoordinateIndex) -> Error {
    Error::InvalidIndex {
        family: family.name(),
        index: l.to_string(),
    }
}

/// Enumeration of `0 ≤ i < j < n` in row-major order.
pub(crate) fn strict_pair_at(n: usize, pos: usize) -> (usize, usize) {
    let mut i = 0;
    let mut rem = pos;
    while rem >= n - 1 - i {
        rem -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + rem)
}

/// Enumeration of `0 ≤ i ≤ j < n` in row-major order.
pub(crate) fn weak_pair_at(n: usize, pos: usize) -> (usize, usize) {
    let mut i = 0;
    let mut rem = pos;
    while rem >= n - i {
        rem -= n - i;
        i += 1;
    }
    (i, i + rem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_enumerations() {
        let strict: Vec<_> = (0..6).map(|k| strict_pair_at(4, k)).collect();
        assert_eq!(strict, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let weak: Vec<_> = (0..3).map(|k| weak_pair_at(2, k)).collect();
        assert_eq!(weak, vec![(0, 0), (0, 1), (1, 1)]);
    }
}
