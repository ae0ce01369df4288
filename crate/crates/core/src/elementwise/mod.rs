//! Families whose coordinate updates touch a few entries: doubly stochastic,
//! multinomial, factored positive semidefinite and Bures–Wasserstein SPD.

mod doubly_stochastic;
mod multinomial;
mod sinkhorn;
mod spd_bw;
mod spsd;

pub use doubly_stochastic::{ds_coordinate_step, ds_riemannian_gradient, DoublyStochastic};
pub use multinomial::{multinomial_coordinate_step, Multinomial};
pub use sinkhorn::{
    full_sinkhorn, marginal_error, sinkhorn_2x2, Sinkhorn2x2Input, SINKHORN_MAX_ITERS,
    SINKHORN_TOL,
};
pub use spd_bw::{spd_bw_coordinate_step, SpdBuresWasserstein};
pub use spsd::{
    spsd_coordinate_step, spsd_coordinate_step_dense, spsd_dense_derivative,
    spsd_factor_gradient, FactoredSpsdPoint, SpsdFactored,
};

use crate::dense::Matrix;

/// Largest magnitude allowed for an exponent in the positive-entry retractions.
pub const EXPONENT_CLAMP: f64 = 30.0;

/// Entries are not shrunk below this value by a single exponential scaling.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// `v·exp(z)` with `z` clamped to `±EXPONENT_CLAMP`, and whether the clamp fired.
///
/// A shrinking factor stops at [`POSITIVITY_FLOOR`]; clamped exponents alone
/// compound over repeated steps and underflow.
#[inline]
pub(crate) fn scale_entry(v: f64, z: f64) -> (f64, bool) {
    let (e, hit) = if z > EXPONENT_CLAMP {
        (EXPONENT_CLAMP.exp(), true)
    } else if z < -EXPONENT_CLAMP {
        ((-EXPONENT_CLAMP).exp(), true)
    } else {
        (z.exp(), false)
    };
    let y = v * e;
    if z < 0.0 && y < POSITIVITY_FLOOR {
        (v.min(POSITIVITY_FLOOR), true)
    } else {
        (y, hit)
    }
}

/// `sqrt(Σ U²/X)`.
pub(crate) fn fisher_norm(x: &Matrix, u: &Matrix) -> f64 {
    x.as_slice()
        .iter()
        .zip(u.as_slice())
        .map(|(xv, uv)| uv * uv / xv)
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn min_entry(x: &Matrix) -> f64 {
    x.as_slice().iter().copied().fold(f64::INFINITY, f64::min)
}
