use crate::manifold::FlopCount;

/// One trace row. `s` counts completed inner steps within epoch `k`, so the
/// initial record is `(0, 0)` and the record after step `s` is `(k, s + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub s: usize,
    pub f: f64,
    pub grad_norm: Option<f64>,
    pub feasibility: Option<f64>,
    /// Cumulative flops, oracle calls included.
    pub flops: u64,
    pub wall_ns: Option<u64>,
}

impl IterationRecord {
    /// Equality with floats compared by bit pattern.
    pub fn bit_eq(&self, other: &Self) -> bool {
        let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => x.to_bits() == y.to_bits(),
            (None, None) => true,
            _ => false,
        };
        self.k == other.k
            && self.s == other.s
            && self.f.to_bits() == other.f.to_bits()
            && opt(self.grad_norm, other.grad_norm)
            && opt(self.feasibility, other.feasibility)
            && self.flops == other.flops
            && self.wall_ns == other.wall_ns
    }
}

/// Bitwise equality of two traces.
pub fn traces_bit_eq(a: &[IterationRecord], b: &[IterationRecord]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.bit_eq(y))
}

/// Work done by a run, split the way the cost model splits it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    /// Calls to the objective gradient that drive the iteration.
    pub gradient_calls: u64,
    /// Extra gradient calls made only to log gradient norms.
    pub logging_gradient_calls: u64,
    /// Epochs started, retries included.
    pub epochs_attempted: u64,
    pub coordinate_steps: u64,
    pub full_steps: u64,
    /// Oracle part `F` of the flop count.
    pub oracle_flops: u64,
    /// Coordinate work split into derivative, update and scalar parts.
    pub coordinate_flops: FlopCount,
    /// Riemannian gradient plus full retraction work of RGD steps.
    pub full_step_flops: u64,
    pub clamped_steps: u64,
    pub skipped_steps: u64,
    /// Times the stepsize was halved after a failed epoch probe.
    pub halvings: u32,
    /// Epoch after which the gradient-norm stop fired.
    pub stopped_at: Option<usize>,
}

impl RunStats {
    pub fn total_flops(&self) -> u64 {
        self.oracle_flops + self.coordinate_flops.total() + self.full_step_flops
    }
}
