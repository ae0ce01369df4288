use proptest::prelude::*;
use rcd_core::dense::{
    apply_disjoint_rotations, apply_disjoint_rotations_sequential, apply_rotation, lu_solve, solve_sym_lyapunov,
    sym_eig, thin_qr, thin_svd, Matrix, Rotation, RotationKind, Side,
};
use rcd_core::rng::Rng;
use rcd_core::Error;

fn orth_residual(q: &Matrix) -> f64 {
    (&q.t_matmul(q) - &Matrix::identity(q.cols())).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qr_reconstructs(seed in any::<u64>(), m in 1usize..12, extra in 0usize..6) {
        let n = m;
        let m = n + extra;
        let a = Rng::new(seed).gaussian(m, n);
        let (q, r) = thin_qr(&a).unwrap();
        prop_assert!((&q.matmul(&r) - &a).max_abs() < 1e-12 * (1.0 + a.max_abs()));
        prop_assert!(orth_residual(&q) < 1e-12);
        for i in 0..n {
            prop_assert!(r[(i, i)] >= 0.0);
            for j in 0..i {
                prop_assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn eig_reconstructs(seed in any::<u64>(), n in 1usize..10) {
        let b = Rng::new(seed).gaussian(n, n);
        let a = b.sym();
        let (v, lambda) = sym_eig(&a).unwrap();
        prop_assert!(lambda.windows(2).all(|w| w[0] <= w[1]));
        let av = a.matmul(&v);
        let vl = v.matmul(&Matrix::diag(&lambda));
        prop_assert!((&av - &vl).max_abs() < 1e-10);
        prop_assert!(orth_residual(&v) < 1e-11);
        let tr: f64 = lambda.iter().sum();
        prop_assert!((tr - a.trace()).abs() < 1e-10);
    }

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), m in 1usize..10, n in 1usize..10) {
        let a = Rng::new(seed).gaussian(m, n);
        let (u, s, v) = thin_svd(&a);
        prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.iter().all(|&x| x >= 0.0));
        let us = Matrix::from_fn(u.rows(), u.cols(), |r, c| u[(r, c)] * s[c]);
        prop_assert!((&us.matmul_t(&v) - &a).max_abs() < 1e-11);
        prop_assert!(orth_residual(&u) < 1e-11);
        prop_assert!(orth_residual(&v) < 1e-11);
        // Frobenius norm is the 2-norm of the singular values.
        let fro: f64 = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((fro - a.frobenius_norm()).abs() < 1e-11 * (1.0 + fro));
    }

    #[test]
    fn lu_solves(seed in any::<u64>(), n in 1usize..10, k in 1usize..4) {
        let mut rng = Rng::new(seed);
        let a = &rng.gaussian(n, n) + &Matrix::identity(n).scale(n as f64);
        let x = rng.gaussian(n, k);
        let b = a.matmul(&x);
        let y = lu_solve(&a, &b, 1e-12).unwrap();
        prop_assert!((&y - &x).max_abs() < 1e-10);
    }

    #[test]
    fn lyapunov_solves(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = Rng::new(seed);
        let b = rng.gaussian(n, n);
        let a = &b.t_matmul(&b) + &Matrix::identity(n);
        let rhs = rng.gaussian(n, n).sym();
        let w = solve_sym_lyapunov(&a, &rhs).unwrap();
        let lhs = &a.matmul(&w) + &w.matmul(&a);
        prop_assert!((&lhs - &rhs).max_abs() < 1e-10);
    }

    #[test]
    fn left_rotation_is_givens_product(seed in any::<u64>(), n in 2usize..8, theta in -3.0f64..3.0) {
        let mut rng = Rng::new(seed);
        let x = rng.gaussian(n, 3);
        let i = rng.index(n);
        let j = (i + 1 + rng.index(n - 1)) % n;
        let mut g = Matrix::identity(n);
        let (s, c) = theta.sin_cos();
        g[(i, i)] = c;
        g[(i, j)] = s;
        g[(j, i)] = -s;
        g[(j, j)] = c;
        let y = apply_rotation(&x, i, j, theta, Side::Left, RotationKind::Circular).unwrap();
        prop_assert!((&y - &g.matmul(&x)).max_abs() < 1e-14 * (1.0 + x.max_abs()) * 4.0);
    }

    #[test]
    fn right_rotation_is_transposed_left(seed in any::<u64>(), n in 2usize..8, theta in -2.0f64..2.0) {
        let mut rng = Rng::new(seed);
        let x = rng.gaussian(4, n);
        let i = rng.index(n);
        let j = (i + 1 + rng.index(n - 1)) % n;
        for kind in [RotationKind::Circular, RotationKind::Hyperbolic] {
            let right = apply_rotation(&x, i, j, theta, Side::Right, kind).unwrap();
            let mut g = Matrix::identity(n);
            let (c, s) = kind.coefficients(theta);
            g[(i, i)] = c;
            g[(j, j)] = c;
            g[(i, j)] = s;
            g[(j, i)] = if kind == RotationKind::Circular { -s } else { s };
            prop_assert!((&right - &x.matmul(&g)).max_abs() < 1e-12 * (1.0 + x.max_abs()));
        }
    }

    #[test]
    fn hyperbolic_rotation_preserves_lorentz_form(seed in any::<u64>(), theta in -2.0f64..2.0) {
        let mut rng = Rng::new(seed);
        let x = rng.gaussian(2, 5);
        let y = apply_rotation(&x, 0, 1, theta, Side::Left, RotationKind::Hyperbolic).unwrap();
        // -x0 x0' + x1 x1' is invariant for every column pair.
        let form = |m: &Matrix, a: usize, b: usize| -m[(0, a)] * m[(0, b)] + m[(1, a)] * m[(1, b)];
        for a in 0..5 {
            for b in 0..5 {
                let (f0, f1) = (form(&x, a, b), form(&y, a, b));
                prop_assert!((f0 - f1).abs() < 1e-10 * (1.0 + f0.abs() + f1.abs()));
            }
        }
    }

    #[test]
    fn disjoint_batch_parallel_equals_sequential(seed in any::<u64>(), n in 2usize..600, cols in 1usize..80) {
        let mut rng = Rng::new(seed);
        let x = rng.gaussian(n, cols);
        let mut rows: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut rows);
        let batch: Vec<Rotation> = rows
            .chunks_exact(2)
            .map(|p| Rotation {
                i: p[0],
                j: p[1],
                theta: rng.uniform(-1.0, 1.0),
                kind: if rng.bernoulli(0.5) { RotationKind::Circular } else { RotationKind::Hyperbolic },
            })
            .collect();
        let par = apply_disjoint_rotations(&x, &batch).unwrap();
        let mut seq = x.clone();
        apply_disjoint_rotations_sequential(&mut seq, &batch).unwrap();
        prop_assert!(par.bit_eq(&seq));
    }
}

#[test]
fn qr_rejects_rank_deficient_input() {
    let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
    assert!(matches!(thin_qr(&a), Err(Error::RankDeficient { column: 1, .. })));
}

#[test]
fn eig_rejects_asymmetric_input() {
    let a = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
    assert!(matches!(sym_eig(&a), Err(Error::NotSymmetric(_))));
}

#[test]
fn svd_of_rank_one_completes_the_basis() {
    let a = Matrix::from_fn(4, 3, |r, c| (r + 1) as f64 * (c + 1) as f64);
    let (u, s, v) = thin_svd(&a);
    assert!(s[1].abs() < 1e-12 && s[2].abs() < 1e-12);
    assert!(orth_residual(&u) < 1e-12);
    assert!(orth_residual(&v) < 1e-12);
}

#[test]
fn overlapping_batch_is_rejected() {
    let mut x = Matrix::identity(4);
    let r = |i, j| Rotation {
        i,
        j,
        theta: 0.1,
        kind: RotationKind::Circular,
    };
    assert!(matches!(
        apply_disjoint_rotations_sequential(&mut x, &[r(0, 1), r(1, 2)]),
        Err(Error::OverlappingIndices(1))
    ));
    assert!(matches!(
        apply_disjoint_rotations_sequential(&mut x, &[r(0, 4)]),
        Err(Error::IndexOutOfRange { .. })
    ));
    assert!(x.bit_eq(&Matrix::identity(4)));
}

#[test]
fn zero_angle_is_bitwise_identity() {
    let x = Rng::new(3).gaussian(5, 5);
    for side in [Side::Left, Side::Right] {
        for kind in [RotationKind::Circular, RotationKind::Hyperbolic] {
            assert!(apply_rotation(&x, 1, 3, 0.0, side, kind).unwrap().bit_eq(&x));
        }
    }
}
