use std::collections::HashSet;

use proptest::prelude::*;
use rcd_core::dense::Matrix;
use rcd_core::elementwise::Multinomial;
use rcd_core::manifold::{CoordinateStepReport, FlopCount, Manifold, Touched};
use rcd_core::optim::{
    default_grid, flop_audit, grid_search, run, run_scheme, strict_pair_pos, traces_bit_eq, Algorithm,
    CoordinateScheme, LinearObjective, ManifoldCoordinates, Objective, OptimizerConfig, QuadraticObjective,
    Selection, Selector, StepSchedule, TraceLevel, MAX_HALVINGS,
};
use rcd_core::rng::Rng;
use rcd_core::rotational::{Hyperbolic, Stiefel};
use rcd_core::Error;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn without_replacement_blocks_are_permutations(seed in any::<u64>(), count in 1usize..40, inner in 1usize..100) {
        let mut sel = Selector::new(Selection::WithoutReplacement, count, None, None, seed).unwrap();
        let plan = sel.epoch_plan(0, inner);
        prop_assert_eq!(plan.len(), inner);
        for block in plan.chunks(count) {
            let seen: HashSet<usize> = block.iter().map(|p| p.pos).collect();
            prop_assert_eq!(seen.len(), block.len());
            prop_assert!(seen.iter().all(|&p| p < count));
        }
    }

    #[test]
    fn tournament_rounds_are_disjoint_and_cover_every_pair(seed in any::<u64>(), n in 2usize..16) {
        let count = n * (n - 1) / 2;
        let mut sel = Selector::new(Selection::WithoutReplacement, count, None, Some(n), seed).unwrap();
        let plan = sel.epoch_plan(0, count);
        let mut all = HashSet::new();
        let mut rows_in_round: Vec<HashSet<usize>> = Vec::new();
        let pair_of: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        for step in &plan {
            prop_assert!(all.insert(step.pos));
            let r = step.round.expect("batched steps carry a round");
            if rows_in_round.len() <= r {
                rows_in_round.resize_with(r + 1, HashSet::new);
            }
            let (i, j) = pair_of[step.pos];
            prop_assert_eq!(strict_pair_pos(n, i, j), step.pos);
            prop_assert!(rows_in_round[r].insert(i));
            prop_assert!(rows_in_round[r].insert(j));
        }
        prop_assert_eq!(all.len(), count);
    }

    #[test]
    fn cyclic_selection_continues_across_epochs(count in 1usize..30, inner in 1usize..30, k in 0usize..5) {
        let mut sel = Selector::new(Selection::Cyclic, count, None, None, 0).unwrap();
        let plan = sel.epoch_plan(k, inner);
        for (s, p) in plan.iter().enumerate() {
            prop_assert_eq!(p.pos, (k * inner + s) % count);
        }
    }

    #[test]
    fn uniform_selection_is_seeded(seed in any::<u64>()) {
        let mut a = Selector::new(Selection::UniformRandom, 17, None, None, seed).unwrap();
        let mut b = Selector::new(Selection::UniformRandom, 17, None, None, seed).unwrap();
        prop_assert_eq!(a.epoch_plan(0, 50), b.epoch_plan(0, 50));
    }

    #[test]
    fn rcd_equals_rcdlin_for_linear_objectives(seed in any::<u64>(), eta in 0.01f64..1.0) {
        // The gradient of a linear objective does not depend on the iterate.
        let mut rng = Rng::new(seed);
        let m = Stiefel::new(6, 2).unwrap();
        let obj = LinearObjective::new(rng.gaussian(6, 2));
        let x0 = m.random_point(&mut rng);
        let cfg = OptimizerConfig {
            epochs: 4,
            inner: 9,
            eta,
            selection: Selection::WithoutReplacement,
            seed,
            ..Default::default()
        };
        let a = run(&m, &obj, &x0, &cfg).unwrap();
        let b = run(&m, &obj, &x0, &OptimizerConfig { algorithm: Algorithm::Rcdlin, ..cfg.clone() }).unwrap();
        prop_assert!(a.trace.iter().zip(&b.trace).all(|(p, q)| p.f.to_bits() == q.f.to_bits()));
        prop_assert!(a.x.bit_eq(&b.x));
    }
}

fn quadratic_on_stiefel(seed: u64) -> (Stiefel, QuadraticObjective, Matrix) {
    let mut rng = Rng::new(seed);
    let m = Stiefel::new(6, 3).unwrap();
    let obj = QuadraticObjective {
        target: rng.gaussian(6, 3),
    };
    let x0 = m.random_point(&mut rng);
    (m, obj, x0)
}

#[test]
fn trace_lengths_follow_the_trace_level() {
    let (m, obj, x0) = quadratic_on_stiefel(1);
    let step = OptimizerConfig {
        epochs: 3,
        inner: 5,
        ..Default::default()
    };
    let out = run(&m, &obj, &x0, &step).unwrap();
    assert_eq!(out.trace.len(), 1 + 3 * 5);
    assert_eq!((out.trace[0].k, out.trace[0].s), (0, 0));
    assert_eq!((out.trace[7].k, out.trace[7].s), (1, 2));
    let epoch = OptimizerConfig {
        trace: TraceLevel::Epoch,
        ..step.clone()
    };
    let out_e = run(&m, &obj, &x0, &epoch).unwrap();
    assert_eq!(out_e.trace.len(), 1 + 3);
    assert!(out_e.x.bit_eq(&out.x));
    assert_eq!(out_e.trace.last().unwrap().f.to_bits(), out.trace.last().unwrap().f.to_bits());
    let rgd = OptimizerConfig {
        algorithm: Algorithm::Rgd,
        ..step
    };
    let out_g = run(&m, &obj, &x0, &rgd).unwrap();
    assert_eq!(out_g.trace.len(), 1 + 3);
    assert!(out_g.trace.iter().skip(1).all(|r| r.s == 1));
}

#[test]
fn flop_ledger_is_consistent_for_every_algorithm() {
    let (m, obj, x0) = quadratic_on_stiefel(2);
    for algorithm in [Algorithm::Rcd, Algorithm::Rcdlin, Algorithm::Rgd, Algorithm::Tsd] {
        let cfg = OptimizerConfig {
            algorithm,
            epochs: 4,
            inner: 6,
            eta: 0.05,
            ..Default::default()
        };
        let out = run(&m, &obj, &x0, &cfg).unwrap();
        flop_audit(&out, &cfg, obj.gradient_flops()).unwrap();
        assert!(out.trace.windows(2).all(|w| w[0].flops <= w[1].flops));
        assert_eq!(out.trace[0].flops, 0);
    }
}

#[test]
fn gradient_calls_per_algorithm() {
    let (m, obj, x0) = quadratic_on_stiefel(3);
    let cfg = |algorithm| OptimizerConfig {
        algorithm,
        epochs: 5,
        inner: 7,
        eta: 0.05,
        grad_log_cadence: 1,
        ..Default::default()
    };
    let rcd = run(&m, &obj, &x0, &cfg(Algorithm::Rcd)).unwrap();
    let lin = run(&m, &obj, &x0, &cfg(Algorithm::Rcdlin)).unwrap();
    assert_eq!(rcd.stats.gradient_calls, 35);
    assert_eq!(lin.stats.gradient_calls, 5);
    // Logging calls are kept out of the ledger.
    assert_eq!(rcd.stats.logging_gradient_calls, 6);
    assert_eq!(rcd.stats.oracle_flops, 35 * obj.gradient_flops());
}

#[test]
fn tsd_is_rejected_off_stiefel() {
    let m = Hyperbolic::new(4, 1).unwrap();
    let x0 = m.random_point(&mut Rng::new(0));
    let obj = LinearObjective::new(Matrix::zeros(4, 1));
    let cfg = OptimizerConfig {
        algorithm: Algorithm::Tsd,
        ..Default::default()
    };
    assert!(matches!(run(&m, &obj, &x0, &cfg), Err(Error::InvalidConfig(_))));
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        OptimizerConfig { epochs: 0, ..Default::default() },
        OptimizerConfig { inner: 0, ..Default::default() },
        OptimizerConfig { eta: 0.0, ..Default::default() },
        OptimizerConfig { eta: f64::NAN, ..Default::default() },
        OptimizerConfig { schedule: StepSchedule::LinearDecay(-1.0), ..Default::default() },
        OptimizerConfig { batched: true, ..Default::default() },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))), "{cfg:?}");
    }
    assert!(OptimizerConfig { algorithm: Algorithm::Rgd, inner: 0, ..Default::default() }.validate().is_ok());
}

#[test]
fn decay_schedule() {
    let s = StepSchedule::LinearDecay(0.5);
    assert_eq!(s.at(1.0, 0), 1.0);
    assert_eq!(s.at(1.0, 2), 0.5);
    assert_eq!(StepSchedule::Fixed.at(0.3, 9), 0.3);
}

#[test]
fn gradient_norm_stop_ends_the_run_early() {
    let (m, obj, x0) = quadratic_on_stiefel(4);
    let cfg = OptimizerConfig {
        epochs: 10_000,
        inner: 15,
        eta: 0.2,
        grad_log_cadence: 1,
        stop_grad_norm: Some(1e-3),
        trace: TraceLevel::Epoch,
        ..Default::default()
    };
    let out = run(&m, &obj, &x0, &cfg).unwrap();
    let k = out.stats.stopped_at.expect("converges well before the budget");
    assert_eq!(out.trace.len(), k + 2);
    assert!(out.trace.last().unwrap().grad_norm.unwrap() < 1e-3);
}

#[test]
fn nonfinite_objective_is_an_error() {
    struct Nan;
    impl Objective for Nan {
        fn value(&self, _x: &Matrix) -> f64 {
            f64::NAN
        }
        fn gradient(&self, x: &Matrix) -> Matrix {
            x.clone()
        }
        fn gradient_flops(&self) -> u64 {
            0
        }
    }
    let m = Stiefel::new(3, 1).unwrap();
    let x0 = m.random_point(&mut Rng::new(0));
    let r = run(&m, &Nan, &x0, &OptimizerConfig::default());
    assert_eq!(r.unwrap_err(), Error::NonFinite { k: 0, s: 0 });
}

/// `x ← x − ηg` on a 1×1 matrix whose epoch probe rejects `|x| > limit`.
struct Clipped {
    limit: f64,
}

impl CoordinateScheme for Clipped {
    fn label(&self) -> String {
        "clipped".into()
    }
    fn shape(&self) -> (usize, usize) {
        (1, 1)
    }
    fn index_count(&self) -> usize {
        1
    }
    fn step(&self, x: &mut Matrix, g: &Matrix, _pos: usize, eta: f64) -> rcd_core::Result<CoordinateStepReport> {
        x[(0, 0)] -= eta * g[(0, 0)];
        Ok(CoordinateStepReport {
            theta: g[(0, 0)],
            flops: FlopCount { derivative: 0, update: 2, scalar: 0 },
            touched: Touched::All,
            clamped: false,
            skipped: false,
        })
    }
    fn feasibility(&self, _x: &Matrix) -> rcd_core::Result<f64> {
        Ok(0.0)
    }
    fn gradient_norm(&self, _x: &Matrix, g: &Matrix) -> rcd_core::Result<f64> {
        Ok(g.frobenius_norm())
    }
    fn full_step(&self, x: &Matrix, g: &Matrix, eta: f64) -> rcd_core::Result<Matrix> {
        Ok(x - &g.scale(eta))
    }
    fn full_step_flops(&self) -> u64 {
        2
    }
    fn epoch_probe(&self, x: &Matrix) -> bool {
        x[(0, 0)].abs() <= self.limit
    }
}

#[test]
fn failed_probe_halves_the_stepsize_and_retries() {
    let obj = QuadraticObjective { target: Matrix::zeros(1, 1) };
    let x0 = Matrix::filled(1, 1, 1.0);
    let cfg = OptimizerConfig {
        epochs: 3,
        inner: 1,
        eta: 100.0,
        ..Default::default()
    };
    // |1 − 100/2^h| ≤ 1 first holds at h = 6, and the halving carries over.
    let out = run_scheme(&Clipped { limit: 1.0 }, &obj, &x0, &cfg).unwrap();
    assert_eq!(out.stats.halvings, 6);
    assert_eq!(out.stats.epochs_attempted, 3 + 6);
    let factor = 1.0 - 100.0 / 64.0;
    assert_eq!(out.x[(0, 0)], factor * factor * factor);
    assert_eq!(out.trace.len(), 4);
    flop_audit(&out, &cfg, obj.gradient_flops()).unwrap();
}

#[test]
fn probe_that_never_passes_exhausts_the_stepsize() {
    let obj = QuadraticObjective { target: Matrix::zeros(1, 1) };
    let x0 = Matrix::filled(1, 1, 1.0);
    let cfg = OptimizerConfig { epochs: 2, ..Default::default() };
    let err = run_scheme(&Clipped { limit: -1.0 }, &obj, &x0, &cfg).unwrap_err();
    assert_eq!(err, Error::StepsizeExhausted { k: 0, halvings: MAX_HALVINGS });
}

#[test]
fn grid_prefers_the_earlier_of_tied_stepsizes() {
    let obj = QuadraticObjective { target: Matrix::zeros(1, 1) };
    let x0 = Matrix::filled(1, 1, 1.0);
    let cfg = OptimizerConfig { epochs: 1, ..Default::default() };
    // η = 0.5 and 1.5 both land on |x| = 0.5; 1.0 lands on 0 exactly.
    let scheme = Clipped { limit: 10.0 };
    let r = grid_search(&scheme, &obj, &x0, &cfg, &[1.5, 0.5, 3.0]);
    assert_eq!(r.best_eta(), 1.5);
    let r = grid_search(&scheme, &obj, &x0, &cfg, &[0.5, 1.5, 1.0]);
    assert_eq!(r.best_eta(), 1.0);
    // A failed run scores +∞ and is reported.
    let r = grid_search(&Clipped { limit: -1.0 }, &obj, &x0, &cfg, &[0.5, 1.0]);
    assert!(r.points.iter().all(|p| p.score == f64::INFINITY && p.error.is_some()));
}

#[test]
fn default_grid_is_powers_of_two() {
    let g = default_grid();
    assert_eq!(g.len(), 14);
    assert_eq!(g[0], 2f64.powi(-10));
    assert_eq!(*g.last().unwrap(), 8.0);
}

#[test]
fn batched_schedule_needs_pair_coordinates() {
    let m = Multinomial::new(3, 4).unwrap();
    let x0 = m.random_point(&mut Rng::new(0));
    let obj = LinearObjective::new(Matrix::zeros(3, 4));
    let cfg = OptimizerConfig {
        algorithm: Algorithm::Rcdlin,
        selection: Selection::WithoutReplacement,
        batched: true,
        inner: 4,
        ..Default::default()
    };
    assert!(ManifoldCoordinates::new(&m).pair_rows().is_none());
    assert!(matches!(run(&m, &obj, &x0, &cfg), Err(Error::InvalidConfig(_))));
}

#[test]
fn batched_anchored_run_equals_sequential() {
    let mut rng = Rng::new(6);
    let m = Stiefel::new(30, 6).unwrap();
    let obj = QuadraticObjective { target: rng.gaussian(30, 6) };
    let x0 = m.random_point(&mut rng);
    let cfg = OptimizerConfig {
        algorithm: Algorithm::Rcdlin,
        epochs: 4,
        inner: 30 * 29 / 2,
        eta: 0.05,
        selection: Selection::WithoutReplacement,
        batched: true,
        trace: TraceLevel::Epoch,
        seed: 3,
        ..Default::default()
    };
    let par = run(&m, &obj, &x0, &cfg).unwrap();
    let seq = run(&m, &obj, &x0, &OptimizerConfig { sequential: true, ..cfg.clone() }).unwrap();
    let stepwise = run(&m, &obj, &x0, &OptimizerConfig { trace: TraceLevel::Step, ..cfg }).unwrap();
    assert!(traces_bit_eq(&par.trace, &seq.trace));
    assert!(par.x.bit_eq(&seq.x));
    assert!(par.x.bit_eq(&stepwise.x));
}
