//! Fast self-checks of the library invariants, one PASS/FAIL line each.

use rcd_core::csv::{read_trace, trace_to_string};
use rcd_core::dense::{frobenius_inner, Matrix};
use rcd_core::elementwise::{
    full_sinkhorn, sinkhorn_2x2, DoublyStochastic, Multinomial, Sinkhorn2x2Input, SpdBuresWasserstein,
    SpsdFactored, SINKHORN_MAX_ITERS, SINKHORN_TOL,
};
use rcd_core::manifold::Manifold;
use rcd_core::optim::{
    flop_audit, run, traces_bit_eq, Algorithm, LinearObjective, OptimizerConfig, Selection, TraceLevel,
};
use rcd_core::problems::{Instance, ProblemName, ProblemSpec};
use rcd_core::rng::Rng;
use rcd_core::rotational::{grassmann_distance, Grassmann, Hyperbolic, Stiefel, Symplectic};

type Check = (&'static str, fn() -> Result<(), String>);

const CHECKS: &[Check] = &[
    ("feasibility after random coordinate steps", feasibility_after_steps),
    ("coordinate derivative matches finite difference", derivative_vs_fd),
    ("zero step leaves the iterate bitwise unchanged", zero_step_identity),
    ("closed-form 2x2 balancing agrees with Sinkhorn", sinkhorn_agreement),
    ("grassmann distance is invariant under O(p)", grassmann_equivariance),
    ("RCD and RCDlin coincide for a linear objective", rcd_equals_rcdlin),
    ("flop accounting", flops_consistent),
    ("CSV trace round-trip", csv_round_trip),
    ("seeded runs are deterministic, batched equals sequential", determinism),
    ("small Procrustes reaches its closed-form optimum", procrustes_gap),
];

/// Runs every check and returns whether all passed.
pub fn run_all() -> bool {
    let mut ok = true;
    for (name, check) in CHECKS {
        match check() {
            Ok(()) => println!("PASS  {name}"),
            Err(why) => {
                ok = false;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    ok
}

fn families() -> Vec<Box<dyn Manifold>> {
    vec![
        Box::new(Stiefel::new(6, 3).unwrap()),
        Box::new(Grassmann::new(6, 3).unwrap()),
        Box::new(Hyperbolic::new(5, 2).unwrap()),
        Box::new(Symplectic::new(3, 2).unwrap()),
        Box::new(DoublyStochastic::uniform(4, 5).unwrap()),
        Box::new(Multinomial::new(4, 3).unwrap()),
        Box::new(SpsdFactored::new(5, 2).unwrap()),
        Box::new(SpdBuresWasserstein::new(4).unwrap()),
    ]
}

fn feasibility_after_steps() -> Result<(), String> {
    let mut rng = Rng::new(11);
    for m in families() {
        let mut x = m.random_point(&mut rng);
        let (r, c) = m.ambient_shape();
        for _ in 0..200 {
            let g = rng.gaussian(r, c);
            let l = m.index_at(rng.index(m.basis_size()));
            m.coordinate_step(&mut x, &g, l, 0.005).map_err(|e| format!("{}: {e}", m.family()))?;
        }
        let res = m.feasibility_residual(&x).map_err(|e| e.to_string())?;
        if res > 1e-9 {
            return Err(format!("{} residual {res:e}", m.family()));
        }
    }
    Ok(())
}

fn derivative_vs_fd() -> Result<(), String> {
    let mut rng = Rng::new(12);
    let h = 1e-6;
    for m in families() {
        let x = m.random_point(&mut rng);
        let (r, c) = m.ambient_shape();
        let g = rng.gaussian(r, c);
        for _ in 0..8 {
            let l = m.index_at(rng.index(m.basis_size()));
            let theta = m.coordinate_derivative(&x, &g, l).map_err(|e| e.to_string())?;
            let (xp, _) = m.coordinate_retract(&x, l, h).map_err(|e| e.to_string())?;
            let (xm, _) = m.coordinate_retract(&x, l, -h).map_err(|e| e.to_string())?;
            let fd = (frobenius_inner(&g, &xp).unwrap() - frobenius_inner(&g, &xm).unwrap()) / (2.0 * h);
            if (fd - theta).abs() > 1e-5 * (1.0 + theta.abs()) {
                return Err(format!("{} {l}: theta {theta} vs {fd}", m.family()));
            }
        }
    }
    Ok(())
}

fn zero_step_identity() -> Result<(), String> {
    let mut rng = Rng::new(13);
    for m in families() {
        let x = m.random_point(&mut rng);
        for l in m.enumerate_basis() {
            let (y, _) = m.coordinate_retract(&x, l, 0.0).map_err(|e| e.to_string())?;
            if !y.bit_eq(&x) {
                return Err(format!("{} {l}", m.family()));
            }
        }
    }
    Ok(())
}

fn sinkhorn_agreement() -> Result<(), String> {
    let mut rng = Rng::new(14);
    for _ in 0..50 {
        let u = rng.uniform_matrix(2, 2, 0.1, 2.0);
        let p = (rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0));
        let q0 = rng.uniform(0.05, 0.95) * (p.0 + p.1);
        let q = (q0, p.0 + p.1 - q0);
        let closed = sinkhorn_2x2(&Sinkhorn2x2Input {
            a: u[(0, 0)],
            b: u[(0, 1)],
            c: u[(1, 0)],
            d: u[(1, 1)],
            p,
            q,
        })
        .map_err(|e| e.to_string())?;
        let it = full_sinkhorn(&u, &[p.0, p.1], &[q.0, q.1], SINKHORN_TOL, SINKHORN_MAX_ITERS)
            .map_err(|e| e.to_string())?;
        for (i, row) in closed.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if (v - it[(i, j)]).abs() > 1e-10 {
                    return Err(format!("entry ({i}, {j}): {v} vs {}", it[(i, j)]));
                }
            }
        }
    }
    Ok(())
}

fn grassmann_equivariance() -> Result<(), String> {
    let mut rng = Rng::new(15);
    for _ in 0..20 {
        let x = rng.stiefel(7, 3);
        let y = rng.stiefel(7, 3);
        let q = rng.orthogonal(3);
        let d = grassmann_distance(&x, &y).map_err(|e| e.to_string())?;
        let dq = grassmann_distance(&x.matmul(&q), &y).map_err(|e| e.to_string())?;
        if (d - dq).abs() > 1e-10 {
            return Err(format!("{d} vs {dq}"));
        }
    }
    Ok(())
}

fn linear_setup() -> (Stiefel, LinearObjective, Matrix) {
    let mut rng = Rng::new(16);
    (Stiefel::new(8, 3).unwrap(), LinearObjective::new(rng.gaussian(8, 3)), rng.stiefel(8, 3))
}

fn rcd_equals_rcdlin() -> Result<(), String> {
    let (m, obj, x0) = linear_setup();
    let cfg = OptimizerConfig {
        epochs: 5,
        inner: m.basis_size(),
        eta: 0.2,
        ..Default::default()
    };
    let a = run(&m, &obj, &x0, &cfg).map_err(|e| e.to_string())?;
    let lin = OptimizerConfig {
        algorithm: Algorithm::Rcdlin,
        ..cfg
    };
    let b = run(&m, &obj, &x0, &lin).map_err(|e| e.to_string())?;
    if !a.x.bit_eq(&b.x) {
        return Err("final iterates differ".into());
    }
    Ok(())
}

fn flops_consistent() -> Result<(), String> {
    let spec = ProblemSpec::new(ProblemName::Pca, 10, 3, 3);
    let inst = Instance::build(&spec).map_err(|e| e.to_string())?;
    for algorithm in [Algorithm::Rcd, Algorithm::Rcdlin, Algorithm::Rgd, Algorithm::Tsd] {
        let inner = inst.scheme(algorithm).map_err(|e| e.to_string())?.index_count();
        let cfg = OptimizerConfig {
            algorithm,
            epochs: 4,
            inner: if algorithm == Algorithm::Rgd { 1 } else { inner },
            eta: 0.01,
            ..Default::default()
        };
        let out = inst.run(&cfg).map_err(|e| e.to_string())?;
        flop_audit(&out, &cfg, inst.objective.gradient_flops()).map_err(|e| format!("{algorithm:?}: {e}"))?;
    }
    Ok(())
}

fn csv_round_trip() -> Result<(), String> {
    let (m, obj, x0) = linear_setup();
    let cfg = OptimizerConfig {
        epochs: 3,
        inner: 7,
        grad_log_cadence: 1,
        feasibility_log_cadence: 2,
        ..Default::default()
    };
    let out = run(&m, &obj, &x0, &cfg).map_err(|e| e.to_string())?;
    let text = trace_to_string(&out.trace);
    let back = read_trace(text.as_bytes()).map_err(|e| e.to_string())?;
    if !traces_bit_eq(&out.trace, &back) {
        return Err("trace changed after write and read".into());
    }
    Ok(())
}

fn determinism() -> Result<(), String> {
    let spec = ProblemSpec::new(ProblemName::Procrustes, 40, 20, 5);
    let inst = Instance::build(&spec).map_err(|e| e.to_string())?;
    let cfg = OptimizerConfig {
        algorithm: Algorithm::Rcdlin,
        epochs: 3,
        inner: 40 * 39 / 2,
        eta: 0.1,
        selection: Selection::WithoutReplacement,
        seed: 9,
        trace: TraceLevel::Epoch,
        batched: true,
        ..Default::default()
    };
    let a = inst.run(&cfg).map_err(|e| e.to_string())?;
    let b = inst.run(&cfg).map_err(|e| e.to_string())?;
    if !traces_bit_eq(&a.trace, &b.trace) || !a.x.bit_eq(&b.x) {
        return Err("two identical runs differ".into());
    }
    let seq = inst
        .run(&OptimizerConfig {
            sequential: true,
            ..cfg
        })
        .map_err(|e| e.to_string())?;
    if !traces_bit_eq(&a.trace, &seq.trace) || !a.x.bit_eq(&seq.x) {
        return Err("batched and sequential runs differ".into());
    }
    Ok(())
}

fn procrustes_gap() -> Result<(), String> {
    let spec = ProblemSpec::new(ProblemName::Procrustes, 8, 4, 1);
    let inst = Instance::build(&spec).map_err(|e| e.to_string())?;
    let cfg = OptimizerConfig {
        epochs: 300,
        inner: 28,
        eta: 0.125,
        trace: TraceLevel::Epoch,
        ..Default::default()
    };
    let out = inst.run(&cfg).map_err(|e| e.to_string())?;
    let gap = inst.gap(out.final_value()).expect("closed form").value;
    if gap > 1e-8 {
        return Err(format!("gap {gap:e}"));
    }
    Ok(())
}
