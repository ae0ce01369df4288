//! The flop model.
//!
//! One flop per scalar add, subtract, multiply or divide. Each transcendental
//! (sin, cos, cosh, sinh, exp, log, arccosh, sqrt) counts as
//! [`TRANSCENDENTAL_FLOPS`]. A step's cost splits into the coordinate derivative,
//! the entry updates, and a scalar part (angle, trigonometric coefficients) that
//! does not depend on the dimensions. `δ` in the cost model is derivative plus
//! update.

use std::ops::{Add, AddAssign};

pub const TRANSCENDENTAL_FLOPS: u64 = 8;

/// Flops of the closed-form 2×2 balancing: quadratic coefficients (14),
/// discriminant with square root (4 + 8), stable root selection (6) and the
/// four scaled outputs (8).
pub const SINKHORN_2X2_FLOPS: u64 = 40;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FlopCount {
    pub derivative: u64,
    pub update: u64,
    pub scalar: u64,
}

impl FlopCount {
    pub fn total(&self) -> u64 {
        self.derivative + self.update + self.scalar
    }
}

impl Add for FlopCount {
    type Output = FlopCount;
    fn add(self, o: FlopCount) -> FlopCount {
        FlopCount {
            derivative: self.derivative + o.derivative,
            update: self.update + o.update,
            scalar: self.scalar + o.scalar,
        }
    }
}

impl AddAssign for FlopCount {
    fn add_assign(&mut self, o: FlopCount) {
        *self = *self + o;
    }
}

/// A row of the published flop table.
#[derive(Clone, Copy, Debug)]
pub struct FlopRow {
    pub family: &'static str,
    pub index: &'static str,
    pub derivative: &'static str,
    pub update: &'static str,
    pub scalar: &'static str,
    pub class: &'static str,
}

/// Per-update costs for an `n×p` iterate (`2n×2p` for symplectic, `m×n` for
/// doubly stochastic, `n×n` for SPD).
pub const FLOP_TABLE: &[FlopRow] = &[
    FlopRow { family: "stiefel", index: "pair(i,j)", derivative: "4p", update: "6p", scalar: "18", class: "O(p)" },
    FlopRow { family: "grassmann", index: "pair(i,j)", derivative: "4p", update: "6p", scalar: "18", class: "O(p)" },
    FlopRow { family: "hyperbolic", index: "pair(i,j)", derivative: "4p", update: "6p", scalar: "18", class: "O(p)" },
    FlopRow { family: "symplectic", index: "pair(i,j), i<j, j!=i+n", derivative: "8p", update: "8p", scalar: "2", class: "O(p)" },
    FlopRow { family: "symplectic", index: "pair(i,i)", derivative: "4p", update: "4p", scalar: "3", class: "O(p)" },
    FlopRow { family: "symplectic", index: "pair(i,i+n)", derivative: "8p", update: "4p", scalar: "18", class: "O(p)" },
    FlopRow { family: "tsd", index: "pair(i,j) columns", derivative: "4n", update: "6n", scalar: "18", class: "O(n)" },
    FlopRow { family: "tsd", index: "column(k)", derivative: "4np", update: "6n", scalar: "35", class: "O(np)" },
    FlopRow { family: "doubly-stochastic", index: "entry(i,j)", derivative: "3", update: "84", scalar: "1", class: "O(1)" },
    FlopRow { family: "multinomial", index: "entry(i,j)", derivative: "1", update: "27", scalar: "1", class: "O(1)" },
    FlopRow { family: "spsd-factored", index: "entry(i,j)", derivative: "1", update: "2", scalar: "0", class: "O(1)" },
    FlopRow { family: "spd-bw", index: "pair(i,j), i<j", derivative: "8n", update: "4n+8", scalar: "5", class: "O(n)" },
    FlopRow { family: "spd-bw", index: "pair(i,i)", derivative: "4n", update: "n+3", scalar: "5", class: "O(n)" },
];
