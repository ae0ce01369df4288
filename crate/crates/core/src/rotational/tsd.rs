use crate::dense::{dot, rotate_in_place, Matrix, RotationKind, Side};
use crate::error::{Error, Result};
use crate::manifold::{
    check_dims, strict_pair_at, CoordinateIndex, CoordinateStepReport, Family, FlopCount,
    Touched, THETA_SKIP, TRANSCENDENTAL_FLOPS,
};

const COLUMN_SKIP: f64 = 1e-14;

/// Column-wise coordinate descent on the Stiefel manifold.
///
/// Coordinates are the column pairs `(i, j)`, `i < j < p`, which rotate two
/// columns, followed by the single columns `k`, which move column `k` along a
/// great circle orthogonal to every column. The column updates cost `O(np)`
/// each and are what make this scheme slower than row rotations for `p ≪ n`.
#[derive(Clone, Debug)]
pub struct Tsd {
    n: usize,
    p: usize,
}

impl Tsd {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        check_dims(Family::Stiefel, p >= 1 && p < n, "need 1 <= p < n")?;
        Ok(Self { n, p })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.p)
    }

    pub fn index_count(&self) -> usize {
        self.p * (self.p - 1) / 2 + self.p
    }

    pub fn index_at(&self, pos: usize) -> CoordinateIndex {
        let pairs = self.p * (self.p - 1) / 2;
        if pos < pairs {
            let (i, j) = strict_pair_at(self.p, pos);
            CoordinateIndex::Pair(i, j)
        } else {
            CoordinateIndex::Column(pos - pairs)
        }
    }

    fn check(&self, l: CoordinateIndex) -> Result<()> {
        match l {
            CoordinateIndex::Pair(i, j) if i < j && j < self.p => Ok(()),
            CoordinateIndex::Column(k) if k < self.p => Ok(()),
            _ => Err(Error::InvalidIndex {
                family: "tsd",
                index: l.to_string(),
            }),
        }
    }

    pub fn flops(&self, l: CoordinateIndex) -> FlopCount {
        let (n, p) = (self.n as u64, self.p as u64);
        match l {
            CoordinateIndex::Column(_) => FlopCount {
                derivative: 4 * n * p,
                update: 6 * n,
                scalar: 3 * TRANSCENDENTAL_FLOPS + 11,
            },
            _ => FlopCount {
                derivative: 4 * n,
                update: 6 * n,
                scalar: 18,
            },
        }
    }

    /// One step on coordinate `l` in place.
    pub fn step(&self, x: &mut Matrix, g: &Matrix, l: CoordinateIndex, eta: f64) -> Result<CoordinateStepReport> {
        self.check(l)?;
        x.check_shape((self.n, self.p))?;
        g.check_shape((self.n, self.p))?;
        let mut flops = self.flops(l);
        let skip = |theta: f64, mut flops: FlopCount| {
            flops.update = 0;
            flops.scalar = 0;
            CoordinateStepReport {
                theta,
                flops,
                touched: Touched::Nothing,
                clamped: false,
                skipped: true,
            }
        };
        match l {
            CoordinateIndex::Pair(i, j) => {
                let theta = column_dot(g, x, j, i) - column_dot(g, x, i, j);
                if theta.abs() < THETA_SKIP || eta == 0.0 || !theta.is_finite() {
                    return Ok(skip(theta, flops));
                }
                rotate_in_place(x, i, j, -eta * theta, Side::Right, RotationKind::Circular)?;
                Ok(CoordinateStepReport {
                    theta,
                    flops,
                    touched: Touched::Columns(i, j),
                    clamped: false,
                    skipped: false,
                })
            }
            CoordinateIndex::Column(k) => {
                let v = projected_column(x, g, k);
                let norm = dot(&v, &v).sqrt();
                if norm < COLUMN_SKIP || eta == 0.0 || !norm.is_finite() {
                    return Ok(skip(norm, flops));
                }
                // Exponential map of the unit sphere along −ηv.
                let angle = eta * norm;
                let (s, c) = angle.sin_cos();
                for r in 0..self.n {
                    x[(r, k)] = c * x[(r, k)] - s * v[r] / norm;
                }
                flops.update = 6 * self.n as u64;
                Ok(CoordinateStepReport {
                    theta: norm,
                    flops,
                    touched: Touched::Column(k),
                    clamped: false,
                    skipped: false,
                })
            }
            CoordinateIndex::Entry(..) => unreachable!("rejected by check"),
        }
    }
}

/// `⟨A_{:,a}, B_{:,b}⟩`.
fn column_dot(a: &Matrix, b: &Matrix, ca: usize, cb: usize) -> f64 {
    (0..a.rows()).map(|r| a[(r, ca)] * b[(r, cb)]).sum()
}

/// `(I − XXᵀ) G_{:,k}`.
fn projected_column(x: &Matrix, g: &Matrix, k: usize) -> Vec<f64> {
    let (n, p) = x.shape();
    let coef: Vec<f64> = (0..p).map(|c| column_dot(x, g, c, k)).collect();
    (0..n)
        .map(|r| g[(r, k)] - dot(x.row(r), &coef))
        .collect()
}

/// One column-wise step on coordinate `l`, returning the new iterate.
pub fn tsd_coordinate_step(x: &Matrix, l: CoordinateIndex, eta: f64, g: &Matrix) -> Result<Matrix> {
    let tsd = Tsd::new(x.rows(), x.cols())?;
    let mut out = x.clone();
    tsd.step(&mut out, g, l, eta)?;
    Ok(out)
}
