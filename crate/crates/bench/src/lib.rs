//! Synthetic workloads for timing runs and the `bench` subcommand.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use structsolve::kernel_ar::{Kernel, KernelARProblem, PointSeries, TargetAccess};
use structsolve::linalg::DenseMatrix;
use structsolve::ops::ToeplitzOperator;

fn normals(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// `len` values of `b_t = 0.5 b_{t-1} + e_t` with standard normal `e_t`.
pub fn ar_series(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev = 0.0;
    (0..len)
        .map(|_| {
            prev = 0.5 * prev + rng.sample::<f64, _>(StandardNormal);
            prev
        })
        .collect()
}

/// Random `n x d` Toeplitz operator and `b = A x + e`.
pub fn toeplitz_problem(n: usize, d: usize, seed: u64) -> (ToeplitzOperator, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = normals(&mut rng, n + d - 1);
    let x = normals(&mut rng, d);
    let op = ToeplitzOperator::new(g.clone(), n, d).expect("valid dimensions");
    let mut b = vec![0.0; n];
    for (i, bi) in b.iter_mut().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            *bi += g[i + d - 1 - j] * xj;
        }
        *bi += rng.sample::<f64, _>(StandardNormal);
    }
    (op, b)
}

/// Like [`toeplitz_problem`] with Student-t (2 dof) noise.
pub fn heavy_tailed_problem(n: usize, d: usize, seed: u64) -> (ToeplitzOperator, Vec<f64>) {
    let (op, mut b) = toeplitz_problem(n, d, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let t = StudentT::new(2.0).expect("positive dof");
    for v in b.iter_mut() {
        *v += t.sample(&mut rng);
    }
    (op, b)
}

/// `n x d` matrix with singular values `(i + 1)^-1`.
pub fn power_law_matrix(n: usize, d: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = n.min(d);
    let u = DMatrix::from_fn(n, r, |_, _| rng.sample::<f64, _>(StandardNormal)).qr().q();
    let v = DMatrix::from_fn(d, r, |_, _| rng.sample::<f64, _>(StandardNormal)).qr().q();
    let s = DMatrix::from_diagonal(&DVector::from_fn(r, |i, _| 1.0 / (i + 1) as f64));
    u.columns(0, r) * s * v.columns(0, r).transpose()
}

fn uniform_points(rng: &mut ChaCha8Rng, points: usize, p: usize) -> PointSeries {
    let data = (0..points * p).map(|_| rng.random_range(-1.0..1.0)).collect();
    PointSeries::new(p, data).expect("finite points")
}

/// Lifted-series kernel problem with `n` blocks.
pub fn kernel_problem(n: usize, p: usize, d: usize, kernel: Kernel, seed: u64) -> KernelARProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    KernelARProblem::autoregressive(uniform_points(&mut rng, n + d, p), d, kernel).expect("valid sizes")
}

/// Degree-2 problem with an explicit noisy target of length `n p^2`.
pub fn poly2_problem(n: usize, p: usize, d: usize, seed: u64) -> KernelARProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let series = uniform_points(&mut rng, n + d - 1, p);
    let coef = normals(&mut rng, d);
    let mut target = Vec::with_capacity(n * p * p);
    for i in 0..n {
        for a in 0..p {
            for c in 0..p {
                let mut s = 0.0;
                for (l, cl) in coef.iter().enumerate() {
                    let x = series.point(i + d - 1 - l);
                    s += cl * x[a] * x[c];
                }
                target.push(s + 0.1 * rng.sample::<f64, _>(StandardNormal));
            }
        }
    }
    let target: Arc<dyn TargetAccess> = Arc::new(target);
    KernelARProblem::with_target(series, d, Kernel::quadratic(), target).expect("valid sizes")
}
