use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use structsolve::kernel_ar::{general_kernel_solve, solve_poly2, Kernel};
use structsolve::lowrank::lowrank_approx;
use structsolve::lp::solve_lp;
use structsolve::ops::{DenseOperator, LinearOperator};
use structsolve::regression::{solve_autoregression, solve_l2};
use structsolve::SolverConfig;
use structsolve_bench::*;

fn toeplitz_apply(c: &mut Criterion) {
    let mut group = c.benchmark_group("toeplitz_apply");
    for e in [10, 12, 14] {
        let n = 1 << e;
        let (op, _) = toeplitz_problem(n, 64, 1);
        let x = vec![1.0; 64];
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| op.apply(&x).unwrap()));
    }
    group.finish();
}

fn autoregression(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("ar");
    group.sample_size(10);
    for e in [12, 13, 14] {
        let n = 1 << e;
        let series = ar_series(n + 16, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| solve_autoregression(&series, 16, 0.5, 0.1, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap())
        });
    }
    group.finish();
}

fn l2(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let (op, rhs) = toeplitz_problem(4096, 10, 4);
    let op: Arc<dyn LinearOperator> = Arc::new(op);
    c.bench_function("l2_4096x10", |b| {
        b.iter(|| solve_l2(op.clone(), &rhs, 0.5, 0.1, &cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap())
    });
}

fn lp(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let (op, rhs) = heavy_tailed_problem(1024, 6, 6);
    let op: Arc<dyn LinearOperator> = Arc::new(op);
    let mut group = c.benchmark_group("lp_1024x6");
    group.sample_size(20);
    for p in [1.0, 1.5, 3.0] {
        group.bench_with_input(BenchmarkId::from_parameter(p), &p, |b, &p| {
            b.iter(|| solve_lp(op.clone(), &rhs, p, 0.5, &cfg, &mut ChaCha8Rng::seed_from_u64(7)).unwrap())
        });
    }
    group.finish();
}

fn lowrank(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let op = DenseOperator::new(power_law_matrix(256, 64, 8));
    c.bench_function("lowrank_256x64_k5", |b| {
        b.iter(|| lowrank_approx(&op, 5, 0.5, &cfg, &mut ChaCha8Rng::seed_from_u64(9)).unwrap())
    });
}

fn kernels(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let general = kernel_problem(1024, 8, 6, Kernel::Polynomial { degree: 3, offset: 1.0 }, 10);
    c.bench_function("kernel_ar_general_1024", |b| {
        b.iter(|| general_kernel_solve(&general, cfg.pinv_rel_tol).unwrap())
    });
    let quad = poly2_problem(256, 4, 3, 11);
    let mut group = c.benchmark_group("poly2_256");
    group.sample_size(10);
    group.bench_function("solve", |b| {
        b.iter(|| solve_poly2(&quad, 0.5, &cfg, &mut ChaCha8Rng::seed_from_u64(12)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, toeplitz_apply, autoregression, l2, lp, lowrank, kernels);
criterion_main!(benches);
