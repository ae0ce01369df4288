//! Benchmark problems with seeded generators and reference optima.

mod lorentz;
mod nearest_symplectic;
mod pca;
mod procrustes;
mod wls;

use serde::{Deserialize, Serialize};

pub use lorentz::{lorentz_distance, minus_lorentz, LorentzEmbedding, LORENTZ_GUARD};
pub use nearest_symplectic::NearestSymplectic;
pub use pca::Pca;
pub use procrustes::Procrustes;
pub use wls::WeightedLs;

use crate::dense::Matrix;
use crate::elementwise::{DoublyStochastic, SpsdFactored};
use crate::error::{Error, Result};
use crate::manifold::{Family, Manifold};
use crate::optim::{
    default_grid, grid_search, run_scheme, Algorithm, CoordinateScheme, LorentzProduct, ManifoldCoordinates,
    Objective, OptimizerConfig, QuadraticObjective, RunOutput, SymplecticBlockScheme, TsdScheme,
};
use crate::rng::Rng;
use crate::rotational::{symplectic_identity, Stiefel, Symplectic};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemName {
    Procrustes,
    Pca,
    NearestSymplectic,
    WeightedLs,
    LorentzEmbed,
    DoublyStochasticQuadratic,
}

impl ProblemName {
    pub const ALL: [ProblemName; 6] = [
        ProblemName::Procrustes,
        ProblemName::Pca,
        ProblemName::NearestSymplectic,
        ProblemName::WeightedLs,
        ProblemName::LorentzEmbed,
        ProblemName::DoublyStochasticQuadratic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemName::Procrustes => "procrustes",
            ProblemName::Pca => "pca",
            ProblemName::NearestSymplectic => "nearest-symplectic",
            ProblemName::WeightedLs => "weighted-ls",
            ProblemName::LorentzEmbed => "lorentz-embed",
            ProblemName::DoublyStochasticQuadratic => "doubly-stochastic-quadratic",
        }
    }
}

impl std::str::FromStr for ProblemName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ProblemName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown problem `{s}`"))
    }
}

/// Everything needed to regenerate a problem instance.
///
/// `n` and `p` are the manifold dimensions: `St(n, p)` for Procrustes and
/// PCA, `Sp(n, p)` (a `2n×2p` iterate) for the symplectic problem, the factor
/// shape for weighted least squares, the hyperboloid dimension and word count
/// for Lorentz embeddings, and the matrix shape for the doubly stochastic problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: ProblemName,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    /// PCA condition number.
    pub cond: f64,
    /// Weighted least squares mask density.
    pub density: f64,
    /// Lorentz negatives per word.
    pub negatives: usize,
    /// Symplectic block updates.
    pub block: bool,
}

impl ProblemSpec {
    pub fn new(name: ProblemName, n: usize, p: usize, seed: u64) -> Self {
        Self {
            name,
            n,
            p,
            seed,
            cond: 1e3,
            density: 1.0,
            negatives: 10,
            block: false,
        }
    }
}

/// Where a reference optimum comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    ClosedForm(f64),
    /// Best final value of a longer RGD run.
    LongRunBaseline(f64),
}

impl Reference {
    pub fn value(self) -> f64 {
        match self {
            Reference::ClosedForm(v) | Reference::LongRunBaseline(v) => v,
        }
    }

    pub fn provenance(self) -> &'static str {
        match self {
            Reference::ClosedForm(_) => "closed-form",
            Reference::LongRunBaseline(_) => "long-run-baseline",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gap {
    pub value: f64,
    /// `f* = 0`, so the gap is `|f − f*|` rather than relative.
    pub absolute: bool,
}

/// `|f − f*| / |f*|`, or `|f − f*|` when `f* = 0`.
pub fn optimality_gap(f: f64, f_star: f64) -> Gap {
    if f_star == 0.0 {
        Gap {
            value: f.abs(),
            absolute: true,
        }
    } else {
        Gap {
            value: (f - f_star).abs() / f_star.abs(),
            absolute: false,
        }
    }
}

const X0_STREAM: u64 = 0x0A11;

enum Geometry {
    Manifold(Box<dyn Manifold>),
    Lorentz { dim: usize, words: usize },
}

/// A generated problem: objective, manifold, starting point and reference.
pub struct Instance {
    pub spec: ProblemSpec,
    pub objective: Box<dyn Objective>,
    pub x0: Matrix,
    pub reference: Option<Reference>,
    geometry: Geometry,
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("spec", &self.spec)
            .field("reference", &self.reference)
            .finish_non_exhaustive()
    }
}

impl Instance {
    pub fn build(spec: &ProblemSpec) -> Result<Self> {
        let (n, p, seed) = (spec.n, spec.p, spec.seed);
        let mut rng = Rng::derived(seed, X0_STREAM);
        let (objective, x0, reference, geometry): (Box<dyn Objective>, _, _, _) = match spec.name {
            ProblemName::Procrustes => {
                let m = Stiefel::new(n, p)?;
                let prob = Procrustes::generate(n, p, seed);
                let r = Reference::ClosedForm(prob.f_star());
                (Box::new(prob), rng.stiefel(n, p), Some(r), Geometry::Manifold(Box::new(m)))
            }
            ProblemName::Pca => {
                let m = Stiefel::new(n, p)?;
                if !(spec.cond > 1.0) {
                    return Err(Error::InvalidArgument("PCA needs a condition number above 1".into()));
                }
                let prob = Pca::generate(n, p, spec.cond, seed)?;
                let r = Reference::ClosedForm(prob.f_star());
                (Box::new(prob), rng.stiefel(n, p), Some(r), Geometry::Manifold(Box::new(m)))
            }
            ProblemName::NearestSymplectic => {
                let m = Symplectic::new(n, p)?;
                let prob = NearestSymplectic::generate(n, p, seed);
                (Box::new(prob), symplectic_identity(n, p), None, Geometry::Manifold(Box::new(m)))
            }
            ProblemName::WeightedLs => {
                let m = SpsdFactored::new(n, p)?;
                if !(spec.density > 0.0 && spec.density <= 1.0) {
                    return Err(Error::InvalidArgument("mask density must lie in (0, 1]".into()));
                }
                let prob = WeightedLs::generate(n, p, spec.density, seed);
                let y0 = rng.gaussian(n, p);
                let y0 = y0.scale(1.0 / y0.frobenius_norm());
                (Box::new(prob), y0, Some(Reference::ClosedForm(0.0)), Geometry::Manifold(Box::new(m)))
            }
            ProblemName::LorentzEmbed => {
                if n < 2 || p < 2 {
                    return Err(Error::InvalidArgument("Lorentz embedding needs dim >= 2 and 2 words".into()));
                }
                let prob = LorentzEmbedding::generate(n, p, spec.negatives, seed);
                let x0 = prob.initial_point(0.1, seed);
                (Box::new(prob), x0, None, Geometry::Lorentz { dim: n, words: p })
            }
            ProblemName::DoublyStochasticQuadratic => {
                let m = DoublyStochastic::uniform(n, p)?;
                let target = Rng::derived(seed, 0xD5).uniform_matrix(n, p, 0.0, 2.0 / (n * p) as f64);
                let x0 = m.product_point();
                (Box::new(QuadraticObjective { target }), x0, None, Geometry::Manifold(Box::new(m)))
            }
        };
        Ok(Self {
            spec: spec.clone(),
            objective,
            x0,
            reference,
            geometry,
        })
    }

    pub fn manifold(&self) -> Option<&dyn Manifold> {
        match &self.geometry {
            Geometry::Manifold(m) => Some(m.as_ref()),
            Geometry::Lorentz { .. } => None,
        }
    }

    /// The coordinate system `algorithm` runs on.
    pub fn scheme(&self, algorithm: Algorithm) -> Result<Box<dyn CoordinateScheme + '_>> {
        match &self.geometry {
            Geometry::Lorentz { dim, words } => {
                if algorithm == Algorithm::Tsd {
                    return Err(Error::InvalidConfig("TSD runs on the Stiefel manifold only".into()));
                }
                Ok(Box::new(LorentzProduct::new(*words, *dim)?))
            }
            Geometry::Manifold(m) => {
                let (n, p) = (self.spec.n, self.spec.p);
                if algorithm == Algorithm::Tsd {
                    if m.family() != Family::Stiefel {
                        return Err(Error::InvalidConfig("TSD runs on the Stiefel manifold only".into()));
                    }
                    return Ok(Box::new(TsdScheme::new(n, p)?));
                }
                if self.spec.block && m.family() == Family::Symplectic {
                    return Ok(Box::new(SymplecticBlockScheme::new(n, p)?));
                }
                Ok(Box::new(ManifoldCoordinates::new(m.as_ref())))
            }
        }
    }

    pub fn run(&self, cfg: &OptimizerConfig) -> Result<RunOutput> {
        let scheme = self.scheme(cfg.algorithm)?;
        run_scheme(scheme.as_ref(), self.objective.as_ref(), &self.x0, cfg)
    }

    pub fn gap(&self, f: f64) -> Option<Gap> {
        self.reference.map(|r| optimality_gap(f, r.value()))
    }

    /// Runs RGD for `factor` times `cfg.epochs` at every stepsize of the
    /// default grid and keeps the best final value as the reference.
    pub fn long_run_baseline(&self, cfg: &OptimizerConfig, factor: usize) -> Result<Reference> {
        let scheme = self.scheme(Algorithm::Rgd)?;
        let long = OptimizerConfig {
            algorithm: Algorithm::Rgd,
            epochs: cfg.epochs * factor,
            grad_log_cadence: 0,
            feasibility_log_cadence: 0,
            trace: crate::optim::TraceLevel::Epoch,
            ..cfg.clone()
        };
        let result = grid_search(scheme.as_ref(), self.objective.as_ref(), &self.x0, &long, &default_grid());
        let best = result.points[result.best].score;
        if !best.is_finite() {
            return Err(Error::InvalidConfig("every baseline run failed".into()));
        }
        Ok(Reference::LongRunBaseline(best))
    }
}
