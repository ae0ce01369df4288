use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use rcd_core::optim::{Algorithm, OptimizerConfig, Selection, StepSchedule, TraceLevel};
use rcd_core::problems::{Instance, ProblemName, ProblemSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Parses a kebab-case enum through its serde names so flags and config files agree.
fn parse_enum<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

/// Experiment settings shared by `run` and `grid`. A JSON config file uses
/// the same names as the long flags; flags given on the command line win.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunArgs {
    /// Flat JSON object with the same keys as these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// procrustes | pca | nearest-symplectic | weighted-ls | lorentz-embed | doubly-stochastic-quadratic
    #[arg(long, value_parser = parse_enum::<ProblemName>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemName>,
    /// rcd | rcdlin | rgd | tsd
    #[arg(long, value_parser = parse_enum::<Algorithm>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algo: Option<Algorithm>,
    /// cyclic | uniform-random | without-replacement | time-cyclic
    #[arg(long, value_parser = parse_enum::<Selection>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub select: Option<Selection>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Stepsize decay rate: η/(1 + rate·epoch).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    /// Inner steps per epoch; defaults to one sweep over the index set
    /// (over the time coordinates for time-cyclic selection).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// CSV trace destination; stdout when absent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// step | epoch
    #[arg(long, value_parser = parse_enum::<TraceLevel>)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceLevel>,
    /// Epochs between gradient-norm logs (0 = never).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_log: Option<usize>,
    /// Epochs between feasibility logs (0 = never).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feas_log: Option<usize>,
    /// Record wall-clock time (makes the CSV run-dependent).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<bool>,
    /// Schedule without-replacement epochs as rounds of disjoint row pairs.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batched: Option<bool>,
    /// Disable the parallel batch path.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequential: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_grad_norm: Option<f64>,
    /// Symplectic block updates.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<bool>,
    /// PCA condition number.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cond: Option<f64>,
    /// Weighted least squares mask density.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    /// Lorentz negatives per word.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negatives: Option<usize>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($f:ident),+) => {
        RunArgs { config: None, $($f: $top.$f.or($base.$f)),+ }
    };
}

/// A fully specified experiment.
pub struct Resolved {
    pub cfg: OptimizerConfig,
    pub out: Option<PathBuf>,
    pub instance: Instance,
}

fn default_dims(name: ProblemName) -> (usize, usize) {
    match name {
        ProblemName::Procrustes => (20, 10),
        ProblemName::Pca => (20, 4),
        ProblemName::NearestSymplectic => (10, 10),
        ProblemName::WeightedLs => (40, 8),
        ProblemName::LorentzEmbed => (3, 30),
        ProblemName::DoublyStochasticQuadratic => (6, 6),
    }
}

/// Errors that mean the request itself was malformed.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn load_config(path: &Path) -> anyhow::Result<RunArgs> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl RunArgs {
    /// Command-line values over config-file values.
    pub fn merged(self) -> anyhow::Result<RunArgs> {
        let base = match &self.config {
            Some(path) => load_config(path)?,
            None => RunArgs::default(),
        };
        Ok(overlay!(
            self, base, problem, algo, select, n, p, eta, decay, epochs, inner, seed, out, trace, grad_log,
            feas_log, timing, batched, sequential, stop_grad_norm, block, cond, density, negatives
        ))
    }

    pub fn resolve(self) -> anyhow::Result<Resolved> {
        let a = self.merged()?;
        let name = a.problem.ok_or_else(|| usage("--problem is required"))?;
        let (dn, dp) = default_dims(name);
        let mut spec = ProblemSpec::new(name, a.n.unwrap_or(dn), a.p.unwrap_or(dp), a.seed.unwrap_or(0));
        if let Some(c) = a.cond {
            spec.cond = c;
        }
        if let Some(d) = a.density {
            spec.density = d;
        }
        if let Some(k) = a.negatives {
            spec.negatives = k;
        }
        spec.block = a.block.unwrap_or(false);
        let instance = Instance::build(&spec).map_err(|e| usage(e.to_string()))?;
        let algorithm = a.algo.unwrap_or(Algorithm::Rcd);
        let scheme = instance.scheme(algorithm).map_err(|e| usage(e.to_string()))?;
        let selection = a.select.unwrap_or(Selection::Cyclic);
        let sweep = match selection {
            Selection::TimeCyclic => scheme.time_cyclic_positions().map_or(0, |v| v.len()),
            _ => scheme.index_count(),
        };
        let inner = match algorithm {
            Algorithm::Rgd => 1,
            _ => a.inner.unwrap_or(sweep.max(1)),
        };
        drop(scheme);
        let cfg = OptimizerConfig {
            algorithm,
            epochs: a.epochs.unwrap_or(100),
            inner,
            eta: a.eta.unwrap_or(0.1),
            schedule: match a.decay {
                Some(rate) => StepSchedule::LinearDecay(rate),
                None => StepSchedule::Fixed,
            },
            selection,
            seed: spec.seed,
            grad_log_cadence: a.grad_log.unwrap_or(0),
            feasibility_log_cadence: a.feas_log.unwrap_or(0),
            trace: a.trace.unwrap_or(TraceLevel::Step),
            timing: a.timing.unwrap_or(false),
            batched: a.batched.unwrap_or(false),
            sequential: a.sequential.unwrap_or(false),
            renormalize_every: 0,
            stop_grad_norm: a.stop_grad_norm,
        };
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(Resolved {
            cfg,
            out: a.out,
            instance,
        })
    }
}
