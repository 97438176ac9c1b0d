#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use structsolve::kernel_ar::{Kernel, KernelARProblem, PointSeries, TargetAccess};
use structsolve::linalg::DenseMatrix;
use structsolve::ops::ToeplitzOperator;

pub fn normals(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Random Toeplitz `n x d` operator with `b = A x + noise`.
pub fn toeplitz_instance(rng: &mut ChaCha8Rng, n: usize, d: usize, noise: f64) -> (ToeplitzOperator, Vec<f64>) {
    let g = normals(rng, n + d - 1);
    let op = ToeplitzOperator::new(g.clone(), n, d).unwrap();
    let x = normals(rng, d);
    let dense = structsolve::oracle::toeplitz_dense(&g, n, d);
    let ax = dense * DVector::from_vec(x);
    let b = ax.iter().map(|v| v + noise * rng.sample::<f64, _>(StandardNormal)).collect();
    (op, b)
}

pub fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DenseMatrix {
    let g = DMatrix::from_fn(n, k, |_, _| rng.sample(StandardNormal));
    g.qr().q().columns(0, k).into_owned()
}

/// `U diag((i+1)^-decay) V^T` with Haar-like `U`, `V`.
pub fn power_law_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize, decay: f64) -> DenseMatrix {
    let r = n.min(d);
    let u = random_orthonormal(rng, n, r);
    let v = random_orthonormal(rng, d, r);
    let s = DMatrix::from_diagonal(&DVector::from_fn(r, |i, _| ((i + 1) as f64).powf(-decay)));
    u * s * v.transpose()
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// Numeric CSV rows, skipping `#` comments.
pub fn read_csv(name: &str) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect()
}

/// The `n = 64, p = 4, d = 3` degree-2 fixture with an explicit target.
pub fn poly2_fixture() -> KernelARProblem {
    let rows = read_csv("poly2_points.csv");
    let p = rows[0].len();
    let series = PointSeries::new(p, rows.into_iter().flatten().collect()).unwrap();
    let target: Vec<f64> = read_csv("poly2_target.csv").into_iter().map(|r| r[0]).collect();
    let target: Arc<dyn TargetAccess> = Arc::new(target);
    KernelARProblem::with_target(series, 3, Kernel::quadratic(), target).unwrap()
}

pub fn ar2_fixture() -> Vec<f64> {
    read_csv("ar2_noiseless.csv").into_iter().map(|r| r[0]).collect()
}

pub fn random_kernel_problem(rng: &mut ChaCha8Rng, n: usize, d: usize, p: usize, kernel: Kernel) -> KernelARProblem {
    let scale = 1.0 / (p as f64).sqrt();
    let data = (0..(n + d) * p).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    KernelARProblem::autoregressive(PointSeries::new(p, data).unwrap(), d, kernel).unwrap()
}

pub fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}
