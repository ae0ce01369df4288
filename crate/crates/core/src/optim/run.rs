use std::time::Instant;

use super::config::{Algorithm, OptimizerConfig, TraceLevel};
use super::objective::Objective;
use super::scheme::{CoordinateScheme, ManifoldCoordinates, TsdScheme};
use super::select::{PlannedStep, Selector};
use super::trace::{IterationRecord, RunStats};
use crate::dense::{apply_disjoint_rotations_in_place, Matrix};
use crate::error::{Error, Result};
use crate::manifold::{CoordinateStepReport, Family, Manifold};

/// Halvings allowed per run before a failing epoch is reported as an error.
pub const MAX_HALVINGS: u32 = 30;

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub x: Matrix,
    pub trace: Vec<IterationRecord>,
    pub stats: RunStats,
}

impl RunOutput {
    pub fn final_value(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Fresh,
    Anchored,
    Full,
}

/// Runs `cfg.algorithm` on `manifold`. TSD needs a Stiefel manifold.
pub fn run(manifold: &dyn Manifold, objective: &dyn Objective, x0: &Matrix, cfg: &OptimizerConfig) -> Result<RunOutput> {
    if cfg.algorithm == Algorithm::Tsd {
        if manifold.family() != Family::Stiefel {
            return Err(Error::InvalidConfig("TSD runs on the Stiefel manifold only".into()));
        }
        let (n, p) = manifold.ambient_shape();
        return run_scheme(&TsdScheme::new(n, p)?, objective, x0, cfg);
    }
    run_scheme(&ManifoldCoordinates::new(manifold), objective, x0, cfg)
}

pub fn run_rcd(manifold: &dyn Manifold, objective: &dyn Objective, x0: &Matrix, cfg: &OptimizerConfig) -> Result<RunOutput> {
    let cfg = OptimizerConfig {
        algorithm: Algorithm::Rcd,
        ..cfg.clone()
    };
    run(manifold, objective, x0, &cfg)
}

pub fn run_rcdlin(manifold: &dyn Manifold, objective: &dyn Objective, x0: &Matrix, cfg: &OptimizerConfig) -> Result<RunOutput> {
    let cfg = OptimizerConfig {
        algorithm: Algorithm::Rcdlin,
        ..cfg.clone()
    };
    run(manifold, objective, x0, &cfg)
}

pub fn run_rgd(manifold: &dyn Manifold, objective: &dyn Objective, x0: &Matrix, cfg: &OptimizerConfig) -> Result<RunOutput> {
    let cfg = OptimizerConfig {
        algorithm: Algorithm::Rgd,
        ..cfg.clone()
    };
    run(manifold, objective, x0, &cfg)
}

/// Runs `cfg.algorithm` on an arbitrary coordinate scheme. RCD and TSD take a
/// fresh gradient before every step, RCDlin one per epoch, RGD one full step
/// per epoch.
pub fn run_scheme(
    scheme: &dyn CoordinateScheme,
    objective: &dyn Objective,
    x0: &Matrix,
    cfg: &OptimizerConfig,
) -> Result<RunOutput> {
    cfg.validate()?;
    x0.check_shape(scheme.shape())?;
    let mode = match cfg.algorithm {
        Algorithm::Rcd | Algorithm::Tsd => Mode::Fresh,
        Algorithm::Rcdlin => Mode::Anchored,
        Algorithm::Rgd => Mode::Full,
    };
    let pair_rows = if cfg.batched {
        Some(scheme.pair_rows().ok_or_else(|| {
            Error::InvalidConfig(format!("batched schedules need row-pair coordinates, {} has none", scheme.label()))
        })?)
    } else {
        None
    };
    let selector = if mode == Mode::Full {
        None
    } else {
        Some(Selector::new(
            cfg.selection,
            scheme.index_count(),
            scheme.time_cyclic_positions(),
            pair_rows,
            cfg.seed,
        )?)
    };
    let mut state = Runner {
        scheme,
        objective,
        cfg,
        mode,
        start: cfg.timing.then(Instant::now),
        x: x0.clone(),
        trace: Vec::new(),
        stats: RunStats::default(),
        selector,
    };
    state.execute()?;
    Ok(RunOutput {
        x: state.x,
        trace: state.trace,
        stats: state.stats,
    })
}

struct Runner<'a> {
    scheme: &'a dyn CoordinateScheme,
    objective: &'a dyn Objective,
    cfg: &'a OptimizerConfig,
    mode: Mode,
    start: Option<Instant>,
    x: Matrix,
    trace: Vec<IterationRecord>,
    stats: RunStats,
    selector: Option<Selector>,
}

fn due(cadence: usize, k: usize) -> bool {
    cadence > 0 && (k + 1).is_multiple_of(cadence)
}

impl Runner<'_> {
    fn execute(&mut self) -> Result<()> {
        let f0 = self.value(0, 0)?;
        self.record(0, 0, f0);
        self.annotate(self.cfg.grad_log_cadence > 0, self.cfg.feasibility_log_cadence > 0)?;
        let mut scale = 1.0;
        for k in 0..self.cfg.epochs {
            loop {
                let eta = self.cfg.schedule.at(self.cfg.eta, k) * scale;
                let saved = (self.x.clone(), self.selector.clone(), self.trace.len());
                self.stats.epochs_attempted += 1;
                self.epoch(k, eta)?;
                if self.scheme.epoch_probe(&self.x) {
                    break;
                }
                if self.stats.halvings >= MAX_HALVINGS {
                    return Err(Error::StepsizeExhausted {
                        k,
                        halvings: self.stats.halvings,
                    });
                }
                (self.x, self.selector) = (saved.0, saved.1);
                self.trace.truncate(saved.2);
                self.stats.halvings += 1;
                scale *= 0.5;
            }
            if due(self.cfg.renormalize_every, k) {
                self.scheme.renormalize(&mut self.x)?;
                let end = self.end_step();
                let f = self.value(k, end)?;
                if let Some(last) = self.trace.last_mut() {
                    last.f = f;
                }
            }
            let gn = self.annotate(
                due(self.cfg.grad_log_cadence, k),
                due(self.cfg.feasibility_log_cadence, k),
            )?;
            if let (Some(tol), Some(gn)) = (self.cfg.stop_grad_norm, gn) {
                if gn < tol {
                    self.stats.stopped_at = Some(k);
                    break;
                }
            }
        }
        Ok(())
    }

    fn end_step(&self) -> usize {
        if self.mode == Mode::Full {
            1
        } else {
            self.cfg.inner
        }
    }

    fn value(&self, k: usize, s: usize) -> Result<f64> {
        let f = self.objective.value(&self.x);
        if f.is_finite() {
            Ok(f)
        } else {
            Err(Error::NonFinite { k, s })
        }
    }

    fn gradient(&mut self, k: usize, s: usize) -> Result<Matrix> {
        let g = self.objective.gradient(&self.x);
        self.stats.gradient_calls += 1;
        self.stats.oracle_flops += self.objective.gradient_flops();
        if g.is_finite() {
            Ok(g)
        } else {
            Err(Error::NonFinite { k, s })
        }
    }

    fn record(&mut self, k: usize, s: usize, f: f64) {
        self.trace.push(IterationRecord {
            k,
            s,
            f,
            grad_norm: None,
            feasibility: None,
            flops: self.stats.total_flops(),
            wall_ns: self.start.map(|t| t.elapsed().as_nanos() as u64),
        });
    }

    /// Adds the requested diagnostics to the latest record. Gradient calls made
    /// here are kept out of the flop count.
    fn annotate(&mut self, grad: bool, feas: bool) -> Result<Option<f64>> {
        let mut gn = None;
        if grad {
            let g = self.objective.gradient(&self.x);
            self.stats.logging_gradient_calls += 1;
            gn = Some(self.scheme.gradient_norm(&self.x, &g)?);
        }
        let feasibility = if feas {
            Some(self.scheme.feasibility(&self.x)?)
        } else {
            None
        };
        if let Some(last) = self.trace.last_mut() {
            last.grad_norm = gn.or(last.grad_norm);
            last.feasibility = feasibility.or(last.feasibility);
        }
        Ok(gn)
    }

    fn account(&mut self, report: &CoordinateStepReport, k: usize, s: usize) -> Result<()> {
        if !report.theta.is_finite() {
            return Err(Error::NonFinite { k, s });
        }
        self.stats.coordinate_steps += 1;
        self.stats.coordinate_flops += report.flops;
        self.stats.clamped_steps += report.clamped as u64;
        self.stats.skipped_steps += report.skipped as u64;
        Ok(())
    }

    fn after_step(&mut self, k: usize, s: usize) -> Result<()> {
        if self.cfg.trace == TraceLevel::Step {
            let f = self.value(k, s + 1)?;
            self.record(k, s + 1, f);
        }
        Ok(())
    }

    fn epoch(&mut self, k: usize, eta: f64) -> Result<()> {
        match self.mode {
            Mode::Full => {
                let g = self.gradient(k, 0)?;
                self.x = self.scheme.full_step(&self.x, &g, eta)?;
                self.stats.full_steps += 1;
                self.stats.full_step_flops += self.scheme.full_step_flops();
                let f = self.value(k, 1)?;
                self.record(k, 1, f);
                return Ok(());
            }
            Mode::Fresh => {
                let plan = self.plan(k);
                for (s, step) in plan.iter().enumerate() {
                    let g = self.gradient(k, s)?;
                    let report = self.scheme.step(&mut self.x, &g, step.pos, eta)?;
                    self.account(&report, k, s)?;
                    self.after_step(k, s)?;
                }
            }
            Mode::Anchored => {
                let plan = self.plan(k);
                let g = self.gradient(k, 0)?;
                let batch = self.cfg.trace == TraceLevel::Epoch && !self.cfg.sequential;
                let mut s = 0;
                while s < plan.len() {
                    let end = match plan[s].round {
                        Some(r) if batch => s + plan[s..].iter().take_while(|p| p.round == Some(r)).count(),
                        _ => s + 1,
                    };
                    if end - s > 1 && self.batched_round(&plan[s..end], &g, eta, k, s)? {
                        s = end;
                        continue;
                    }
                    for (q, step) in plan[s..end].iter().enumerate() {
                        let report = self.scheme.step(&mut self.x, &g, step.pos, eta)?;
                        self.account(&report, k, s + q)?;
                        self.after_step(k, s + q)?;
                    }
                    s = end;
                }
            }
        }
        if self.cfg.trace == TraceLevel::Epoch {
            let f = self.value(k, self.cfg.inner)?;
            self.record(k, self.cfg.inner, f);
        }
        Ok(())
    }

    fn plan(&mut self, k: usize) -> Vec<PlannedStep> {
        self.selector
            .as_mut()
            .expect("coordinate modes have a selector")
            .epoch_plan(k, self.cfg.inner)
    }

    /// Applies one round of disjoint row rotations as a batch. Each angle reads
    /// only its own two rows, so this equals the sequential order bit for bit.
    /// Returns `false` without touching `x` if some step is not a rotation.
    fn batched_round(&mut self, round: &[PlannedStep], g: &Matrix, eta: f64, k: usize, s0: usize) -> Result<bool> {
        let mut rotations = Vec::with_capacity(round.len());
        let mut reports = Vec::with_capacity(round.len());
        for step in round {
            match self.scheme.plan_rotation(&self.x, g, step.pos, eta) {
                Some(planned) => {
                    let (rot, report) = planned?;
                    rotations.push(rot);
                    reports.push(report);
                }
                None => return Ok(false),
            }
        }
        apply_disjoint_rotations_in_place(&mut self.x, &rotations)?;
        for (q, report) in reports.iter().enumerate() {
            self.account(report, k, s0 + q)?;
        }
        Ok(true)
    }
}

/// Checks that a run's bookkeeping matches the cost model: the number of
/// oracle calls implied by the algorithm, `F` per call, and a final trace
/// entry equal to the total.
pub fn flop_audit(out: &RunOutput, cfg: &OptimizerConfig, oracle_flops: u64) -> std::result::Result<(), String> {
    let st = &out.stats;
    let per_epoch = match cfg.algorithm {
        Algorithm::Rcd | Algorithm::Tsd => cfg.inner as u64,
        Algorithm::Rcdlin | Algorithm::Rgd => 1,
    };
    let expected_calls = st.epochs_attempted * per_epoch;
    if st.gradient_calls != expected_calls {
        return Err(format!(
            "expected {expected_calls} gradient calls, counted {}",
            st.gradient_calls
        ));
    }
    if st.oracle_flops != st.gradient_calls * oracle_flops {
        return Err(format!(
            "oracle flops {} differ from {} calls at {oracle_flops} each",
            st.oracle_flops, st.gradient_calls
        ));
    }
    let (steps, per_epoch_steps) = match cfg.algorithm {
        Algorithm::Rgd => (st.full_steps, 1),
        _ => (st.coordinate_steps, cfg.inner as u64),
    };
    if steps != st.epochs_attempted * per_epoch_steps {
        return Err(format!(
            "expected {} steps, counted {steps}",
            st.epochs_attempted * per_epoch_steps
        ));
    }
    match out.trace.last() {
        Some(r) if r.flops == st.total_flops() => Ok(()),
        Some(r) => Err(format!("trace ends at {} flops, ledger says {}", r.flops, st.total_flops())),
        None => Err("empty trace".into()),
    }
}
