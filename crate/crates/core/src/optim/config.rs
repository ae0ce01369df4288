use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Fresh Euclidean gradient at every inner step.
    Rcd,
    /// Gradient anchored at the start of each epoch.
    Rcdlin,
    /// One full Riemannian gradient step per epoch.
    Rgd,
    /// Column-wise Stiefel coordinate descent with fresh gradients.
    Tsd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Position `(k·S + s) mod |I|` of the enumeration.
    Cyclic,
    UniformRandom,
    /// A fresh random permutation of the index set for every `|I|` steps.
    WithoutReplacement,
    /// Cycles through the time–space pairs only.
    TimeCyclic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepSchedule {
    Fixed,
    /// `η / (1 + rate·k)` in epoch `k`.
    LinearDecay(f64),
}

impl StepSchedule {
    pub fn at(&self, eta: f64, k: usize) -> f64 {
        match *self {
            StepSchedule::Fixed => eta,
            StepSchedule::LinearDecay(rate) => eta / (1.0 + rate * k as f64),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceLevel {
    /// One record after every inner step.
    Step,
    /// One record at the end of every epoch.
    Epoch,
}

/// Settings for one optimization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    /// Outer epochs `K`.
    pub epochs: usize,
    /// Inner steps per epoch `S`; ignored by RGD.
    pub inner: usize,
    pub eta: f64,
    pub schedule: StepSchedule,
    pub selection: Selection,
    pub seed: u64,
    /// Epochs between gradient-norm logs, 0 for never.
    pub grad_log_cadence: usize,
    /// Epochs between feasibility logs, 0 for never.
    pub feasibility_log_cadence: usize,
    pub trace: TraceLevel,
    /// Record cumulative wall-clock time. Off by default so traces are reproducible.
    pub timing: bool,
    /// Order without-replacement epochs as rounds of disjoint row pairs, which
    /// lets anchored runs apply each round as one parallel batch.
    pub batched: bool,
    /// Never use the parallel batch path, even when it applies.
    pub sequential: bool,
    /// Epochs between re-normalizations of the iterate, 0 for never.
    pub renormalize_every: usize,
    /// Stop once a logged gradient norm falls below this value.
    pub stop_grad_norm: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Rcd,
            epochs: 100,
            inner: 1,
            eta: 0.1,
            schedule: StepSchedule::Fixed,
            selection: Selection::Cyclic,
            seed: 0,
            grad_log_cadence: 0,
            feasibility_log_cadence: 0,
            trace: TraceLevel::Step,
            timing: false,
            batched: false,
            sequential: false,
            renormalize_every: 0,
            stop_grad_norm: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if self.inner == 0 && self.algorithm != Algorithm::Rgd {
            return Err(Error::InvalidConfig("inner steps must be at least 1".into()));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("stepsize must be positive, got {}", self.eta)));
        }
        if let StepSchedule::LinearDecay(rate) = self.schedule {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(Error::InvalidConfig(format!("decay rate must be non-negative, got {rate}")));
            }
        }
        if self.batched && self.selection != Selection::WithoutReplacement {
            return Err(Error::InvalidConfig(
                "batched schedules need without-replacement selection".into(),
            ));
        }
        Ok(())
    }
}
