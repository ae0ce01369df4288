use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rcd_core::dense::{apply_disjoint_rotations_in_place, apply_disjoint_rotations_sequential, Rotation, RotationKind};
use rcd_core::optim::{run, Algorithm, OptimizerConfig, QuadraticObjective, Selection, TraceLevel};
use rcd_core::rng::Rng;
use rcd_core::rotational::Stiefel;

fn batch(n: usize, rng: &mut Rng) -> Vec<Rotation> {
    let mut rows: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut rows);
    rows.chunks_exact(2)
        .map(|p| Rotation {
            i: p[0],
            j: p[1],
            theta: rng.uniform(-0.1, 0.1),
            kind: RotationKind::Circular,
        })
        .collect()
}

fn rotations(c: &mut Criterion) {
    let mut group = c.benchmark_group("disjoint_rotations");
    for &(n, p) in &[(256, 64), (1024, 256), (4096, 512)] {
        let mut rng = Rng::new(1);
        let x0 = rng.gaussian(n, p);
        let b = batch(n, &mut rng);
        let label = format!("{n}x{p}");
        group.bench_with_input(BenchmarkId::new("sequential", &label), &b, |bench, b| {
            let mut x = x0.clone();
            bench.iter(|| apply_disjoint_rotations_sequential(black_box(&mut x), b).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("parallel", &label), &b, |bench, b| {
            let mut x = x0.clone();
            bench.iter(|| apply_disjoint_rotations_in_place(black_box(&mut x), b).unwrap());
        });
    }
    group.finish();
}

fn rcdlin_epoch(c: &mut Criterion) {
    let mut group = c.benchmark_group("rcdlin_batched_epoch");
    group.sample_size(10);
    let (n, p) = (400, 100);
    let mut rng = Rng::new(2);
    let m = Stiefel::new(n, p).unwrap();
    let obj = QuadraticObjective {
        target: rng.gaussian(n, p),
    };
    let x0 = rng.stiefel(n, p);
    let cfg = OptimizerConfig {
        algorithm: Algorithm::Rcdlin,
        epochs: 1,
        inner: n * (n - 1) / 2,
        eta: 0.01,
        selection: Selection::WithoutReplacement,
        batched: true,
        trace: TraceLevel::Epoch,
        ..Default::default()
    };
    for sequential in [true, false] {
        let cfg = OptimizerConfig { sequential, ..cfg.clone() };
        let name = if sequential { "sequential" } else { "parallel" };
        group.bench_function(name, |bench| bench.iter(|| run(&m, &obj, black_box(&x0), &cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, rotations, rcdlin_epoch);
criterion_main!(benches);
