//! Families whose coordinate updates act on two rows at a time: Stiefel,
//! Grassmann, hyperbolic and symplectic, plus the column-wise Stiefel baseline.

mod grassmann;
mod hyperbolic;
mod stiefel;
mod symplectic;
mod tsd;

pub use grassmann::{grassmann_distance, Grassmann};
pub use hyperbolic::{
    hyperbolic_canonical_gradient, hyperbolic_cayley_retract, hyperbolic_coordinate_step,
    Hyperbolic,
};
pub use stiefel::{
    stiefel_canonical_gradient, stiefel_canonical_inner, stiefel_coordinate_step, Stiefel,
};
pub use symplectic::{
    apply_omega, symplectic_block_flops, symplectic_block_step, symplectic_cayley_retract,
    symplectic_coordinate_step, symplectic_diag_cross_retract, symplectic_identity, Symplectic,
    SymplecticBlock,
};
pub use tsd::{tsd_coordinate_step, Tsd};

pub(crate) use hyperbolic::lorentz_pair_derivative;
pub(crate) use symplectic::symplectic_block_step_in_place;

use crate::dense::{dot, Matrix};

/// `⟨G_i, X_j⟩ − ⟨G_j, X_i⟩` over rows.
#[inline]
pub(crate) fn skew_row_derivative(x: &Matrix, g: &Matrix, i: usize, j: usize) -> f64 {
    dot(g.row(i), x.row(j)) - dot(g.row(j), x.row(i))
}

/// `‖XᵀX − I‖_F`.
pub(crate) fn orthonormality_residual(x: &Matrix) -> f64 {
    let mut r = x.t_matmul(x);
    for k in 0..r.rows() {
        r[(k, k)] -= 1.0;
    }
    r.frobenius_norm()
}

/// Cost of `XᵀG`, the symmetric part, `X·S` and a subtraction for `n×p` input.
pub(crate) fn stiefel_projection_flops(n: u64, p: u64) -> u64 {
    4 * n * p * p + n * p + p * p
}

/// Householder QR of an `n×p` matrix with `Q` formed explicitly, plus `X + tU`.
pub(crate) fn qr_retraction_flops(n: u64, p: u64) -> u64 {
    2 * n * p + 4 * n * p * p - 4 * p * p * p / 3
}
