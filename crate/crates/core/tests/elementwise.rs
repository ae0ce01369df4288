use proptest::prelude::*;
use rcd_core::dense::{frobenius_inner, Matrix};
use rcd_core::elementwise::{
    full_sinkhorn, marginal_error, sinkhorn_2x2, DoublyStochastic, Multinomial, Sinkhorn2x2Input,
    SpdBuresWasserstein, spsd_factor_gradient, SINKHORN_MAX_ITERS, SINKHORN_TOL,
};
use rcd_core::manifold::{CoordinateIndex, Manifold};
use rcd_core::rng::Rng;
use rcd_core::Error;

fn block_input() -> impl Strategy<Value = Sinkhorn2x2Input> {
    (
        prop::array::uniform4(0.01f64..5.0),
        0.05f64..1.0,
        0.05f64..1.0,
        0.02f64..0.98,
    )
        .prop_map(|([a, b, c, d], p0, p1, split)| {
            let total = p0 + p1;
            Sinkhorn2x2Input {
                a,
                b,
                c,
                d,
                p: (p0, p1),
                q: (split * total, (1.0 - split) * total),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_balancing_matches_iteration(input in block_input()) {
        let closed = sinkhorn_2x2(&input).unwrap();
        let u = Matrix::from_rows(&[[input.a, input.b], [input.c, input.d]]);
        let it = full_sinkhorn(&u, &[input.p.0, input.p.1], &[input.q.0, input.q.1], SINKHORN_TOL, SINKHORN_MAX_ITERS)
            .unwrap();
        let x = Matrix::from_rows(&closed);
        prop_assert!(marginal_error(&x, &[input.p.0, input.p.1], &[input.q.0, input.q.1]) < 1e-12);
        prop_assert!((&x - &it).max_abs() < 1e-10);
        // Balancing is a diagonal scaling, so the cross ratio is preserved.
        let ratio = |m: &Matrix| m[(0, 0)] * m[(1, 1)] / (m[(0, 1)] * m[(1, 0)]);
        let (r0, r1) = (ratio(&u), ratio(&x));
        prop_assert!((r0 - r1).abs() < 1e-9 * r0);
    }

    #[test]
    fn doubly_stochastic_steps_keep_marginals(seed in any::<u64>(), m in 2usize..5, n in 2usize..5) {
        let mut rng = Rng::new(seed);
        let ds = DoublyStochastic::uniform(m, n).unwrap();
        let mut x = ds.random_point(&mut rng);
        for _ in 0..50 {
            let g = rng.gaussian(m, n);
            let l = ds.index_at(rng.index(ds.basis_size()));
            ds.coordinate_step(&mut x, &g, l, 0.05).unwrap();
        }
        prop_assert!(marginal_error(&x, ds.mu(), ds.nu()) < 1e-12);
        prop_assert!(x.as_slice().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn multinomial_rows_stay_on_simplex(seed in any::<u64>(), t in -50.0f64..50.0) {
        let mut rng = Rng::new(seed);
        let mfd = Multinomial::new(3, 4).unwrap();
        let mut x = mfd.random_point(&mut rng);
        for _ in 0..20 {
            let l = mfd.index_at(rng.index(mfd.basis_size()));
            mfd.coordinate_retract_in_place(&mut x, l, t).unwrap();
        }
        for s in x.row_sums() {
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
        prop_assert!(x.as_slice().iter().all(|&v| v > 0.0 && v.is_finite()));
    }

    #[test]
    fn spsd_factor_gradient_matches_finite_differences(seed in any::<u64>()) {
        // F(X) = ⟨S, X⟩ pulled back to Y ↦ ⟨S, YYᵀ⟩.
        let mut rng = Rng::new(seed);
        let y = rng.gaussian(5, 2);
        let s = rng.gaussian(5, 5);
        let gy = spsd_factor_gradient(&y, &s).unwrap();
        let f = |m: &Matrix| frobenius_inner(&s, &m.matmul_t(m)).unwrap();
        let h = 1e-6;
        for r in 0..5 {
            for c in 0..2 {
                let mut yp = y.clone();
                yp[(r, c)] += h;
                let mut ym = y.clone();
                ym[(r, c)] -= h;
                let fd = (f(&yp) - f(&ym)) / (2.0 * h);
                prop_assert!((fd - gy[(r, c)]).abs() < 1e-6 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn spd_bw_retraction_is_a_congruence(seed in any::<u64>(), t in -0.2f64..0.2) {
        let mut rng = Rng::new(seed);
        let mfd = SpdBuresWasserstein::new(4).unwrap();
        let mut x = mfd.random_point(&mut rng);
        for _ in 0..20 {
            let l = mfd.index_at(rng.index(mfd.basis_size()));
            let CoordinateIndex::Pair(i, j) = l else { unreachable!() };
            let mut e = Matrix::identity(4);
            if i == j {
                e[(i, i)] += 2.0 * t;
            } else {
                e[(i, j)] += t;
                e[(j, i)] += t;
            }
            let oracle = e.matmul(&x).matmul(&e);
            mfd.coordinate_retract_in_place(&mut x, l, t).unwrap();
            prop_assert!((&x - &oracle).max_abs() < 1e-12 * (1.0 + oracle.max_abs()));
        }
        prop_assert!(mfd.epoch_probe(&x));
    }
}

#[test]
fn infeasible_marginals_have_no_root() {
    let input = Sinkhorn2x2Input {
        a: 1.0,
        b: 1.0,
        c: 1.0,
        d: 1.0,
        p: (0.5, 0.5),
        q: (1.0, 0.0),
    };
    assert_eq!(sinkhorn_2x2(&input), Err(Error::NoPositiveRoot));
    let bad = Sinkhorn2x2Input { a: 0.0, ..input };
    assert!(matches!(sinkhorn_2x2(&bad), Err(Error::NonPositive { i: 0, j: 0, .. })));
}

#[test]
fn full_sinkhorn_checks_inputs() {
    let u = Matrix::filled(2, 3, 1.0);
    assert!(matches!(full_sinkhorn(&u, &[0.5, 0.5], &[1.0], 1e-12, 10), Err(Error::ShapeMismatch { .. })));
    let mut z = u.clone();
    z[(1, 2)] = -1.0;
    assert!(matches!(
        full_sinkhorn(&z, &[0.5, 0.5], &[0.3, 0.3, 0.4], 1e-12, 10),
        Err(Error::NonPositive { i: 1, j: 2, .. })
    ));
}

#[test]
fn doubly_stochastic_rejects_unnormalized_marginals() {
    assert!(DoublyStochastic::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
    assert!(DoublyStochastic::new(vec![0.5, 0.5], vec![1.0]).is_err());
    assert!(DoublyStochastic::new(vec![0.3, 0.7], vec![0.6, 0.4]).is_ok());
}

#[test]
fn product_point_is_feasible_for_skewed_marginals() {
    let ds = DoublyStochastic::new(vec![0.1, 0.2, 0.7], vec![0.25, 0.75]).unwrap();
    let x = ds.product_point();
    assert!(ds.feasibility_residual(&x).unwrap() < 1e-15);
}

#[test]
fn huge_multinomial_exponent_is_clamped() {
    let mfd = Multinomial::new(1, 2).unwrap();
    let x = Matrix::from_rows(&[[0.5, 0.5]]);
    let (y, info) = mfd.coordinate_retract(&x, CoordinateIndex::Entry(0, 0), 1e6).unwrap();
    assert!(info.clamped);
    assert!(y.as_slice().iter().all(|&v| v > 0.0));
    assert!((y[(0, 0)] + y[(0, 1)] - 1.0).abs() < 1e-15);
}

#[test]
fn doubly_stochastic_basis_is_tangent() {
    let ds = DoublyStochastic::uniform(3, 4).unwrap();
    let x = ds.random_point(&mut Rng::new(2));
    for l in ds.enumerate_basis() {
        let b = ds.materialize_basis(&x, l).unwrap();
        assert!(b.row_sums().iter().chain(&b.col_sums()).all(|s| s.abs() < 1e-14));
        let ones = Matrix::filled(3, 4, 1.0);
        assert!(frobenius_inner(&ones, &b).unwrap().abs() < 1e-14);
    }
}
