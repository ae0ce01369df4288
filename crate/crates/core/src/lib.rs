//! Coordinate-wise optimization on matrix manifolds.
//!
//! Each manifold exposes a coordinate basis of its tangent spaces whose
//! derivatives and retractions cost `O(p)`, `O(1)` or `O(n)` instead of the
//! `O(np²)`-type cost of a full Riemannian gradient step. The optimizers in
//! [`optim`] run cyclic or randomized coordinate descent with either a fresh
//! gradient per step (RCD) or one anchored per epoch (RCDlin), plus a full
//! gradient baseline (RGD).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csv;
pub mod dense;
pub mod elementwise;
pub mod error;
pub mod manifold;
pub mod optim;
pub mod problems;
pub mod rng;
pub mod rotational;

pub use dense::Matrix;
pub use error::{Error, Result};
