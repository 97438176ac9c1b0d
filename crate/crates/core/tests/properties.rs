mod common;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use structsolve::kernel_ar::{self, decode_row, encode_row, Kernel};
use structsolve::leverage::sample_rows;
use structsolve::lowrank::lowrank_approx;
use structsolve::lp::lewis_weights_fixed_point;
use structsolve::ops::{
    ComposedOperator, DenseOperator, DiagonalOperator, DifferenceOperator, LinearOperator, ToeplitzOperator,
};
use structsolve::regression::solve_l2;
use structsolve::sketch::{median_norm_estimate, CountSketchSpec, TensorSketchSpec};
use structsolve::{linalg, oracle, SolverConfig};

use common::*;

fn gaussian(seed: u64, rows: usize, cols: usize) -> DMatrix<f64> {
    linalg::gaussian_matrix(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn toeplitz_products_match_dense(n in 1usize..200, d in 1usize..24, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = normals(&mut rng, n + d - 1);
        let x = normals(&mut rng, d);
        let y = normals(&mut rng, n);
        let op = ToeplitzOperator::new(g.clone(), n, d).unwrap();
        let dense = oracle::toeplitz_dense(&g, n, d);
        let fwd = DVector::from_vec(op.apply(&x).unwrap());
        let back = DVector::from_vec(op.apply_transpose(&y).unwrap());
        let scale = 1e-10 * (n + d) as f64 * (1.0 + linalg::max_abs(&g));
        prop_assert!((fwd - &dense * DVector::from_vec(x)).amax() <= scale * 10.0);
        prop_assert!((back - dense.transpose() * DVector::from_vec(y)).amax() <= scale * 10.0);
        prop_assert_eq!(op.matvec_count(), 2);
    }

    #[test]
    fn composed_operator_is_adjoint(n in 8usize..100, d in 1usize..8, h in 0.1f64..2.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t: Arc<dyn LinearOperator> = Arc::new(ToeplitzOperator::new(normals(&mut rng, n + d - 1), n, d).unwrap());
        let op = ComposedOperator::new(vec![
            t,
            Arc::new(DifferenceOperator::new(d)),
            Arc::new(DiagonalOperator::inverse_powers(h, d)),
        ]).unwrap();
        let x = normals(&mut rng, d);
        let y = normals(&mut rng, n);
        let lhs = linalg::dot(&op.apply(&x).unwrap(), &y);
        let rhs = linalg::dot(&x, &op.apply_transpose(&y).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()));
    }

    #[test]
    fn count_sketch_is_its_matrix(n in 1usize..60, m in 1usize..20, seed in any::<u64>()) {
        let cs = CountSketchSpec::new(n, m, seed).unwrap();
        let x = normals(&mut ChaCha8Rng::seed_from_u64(seed ^ 1), n);
        let direct = DVector::from_vec(cs.apply(&x).unwrap());
        prop_assert!((direct - cs.materialize() * DVector::from_vec(x)).amax() < 1e-12);
    }

    #[test]
    fn tensor_sketch_is_its_matrix(p in 1usize..8, m in 1usize..40, seed in any::<u64>()) {
        let ts = TensorSketchSpec::new(p, m, seed).unwrap();
        let u = normals(&mut ChaCha8Rng::seed_from_u64(seed ^ 2), p);
        let uu = DVector::from_fn(p * p, |r, _| u[r / p] * u[r % p]);
        let direct = DVector::from_vec(ts.apply(&u).unwrap());
        prop_assert!((direct - ts.materialize() * uu).amax() < 1e-10);
    }

    #[test]
    fn sampled_rows_carry_inverse_scales(scores in prop::collection::vec(0.0f64..5.0, 1..50), r in 1usize..40, seed in any::<u64>()) {
        prop_assume!(scores.iter().sum::<f64>() > 0.0);
        let s = sample_rows(&scores, r, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let total: f64 = scores.iter().sum();
        prop_assert_eq!(s.len(), r);
        prop_assert!((s.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for &(row, scale) in s.samples() {
            prop_assert!(scores[row] > 0.0);
            let expected = 1.0 / (r as f64 * scores[row] / total).sqrt();
            prop_assert!((scale - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn lewis_weights_sum_to_rank(n in 12usize..60, d in 1usize..5, p in 1.0f64..3.9, seed in any::<u64>()) {
        let c = gaussian(seed, n, d);
        let state = lewis_weights_fixed_point(&c, p, 1e-10, 5000).unwrap();
        prop_assume!(state.converged);
        let total: f64 = state.weights.iter().sum();
        prop_assert!((total - d as f64).abs() < 1e-4 * d as f64, "sum {}", total);
        prop_assert!(state.weights.iter().all(|&w| (0.0..=1.0 + 1e-9).contains(&w)));
    }

    #[test]
    fn band_gram_equals_naive(n in 1usize..40, d in 1usize..6, p in 1usize..5, kind in 0usize..3, seed in any::<u64>()) {
        let kernel = match kind {
            0 => Kernel::Linear,
            1 => Kernel::quadratic(),
            _ => Kernel::Polynomial { degree: 3, offset: 0.5 },
        };
        let prob = random_kernel_problem(&mut ChaCha8Rng::seed_from_u64(seed), n, d, p, kernel);
        let bands = kernel_ar::banded_inner_products(&prob);
        let bg = kernel_ar::gram_via_bands(&prob, &bands).unwrap();
        let naive = oracle::naive_kernel_gram(&prob);
        prop_assert!((&bg.gram - &naive).amax() <= 1e-10 * naive.amax().max(1.0));
        prop_assert_eq!(bands.evaluations, kernel_ar::band_pair_count(n + d - 1, d));
        prop_assert!(bg.gram.transpose() == bg.gram);
    }

    #[test]
    fn row_codec_roundtrip(p in 1usize..10, i in 0usize..100, a in 0usize..10, c in 0usize..10) {
        prop_assume!(a < p && c < p);
        prop_assert_eq!(decode_row(p, encode_row(p, i, a, c)), (i, a, c));
    }

    #[test]
    fn median_lies_between_extremes(values in prop::collection::vec(-1e6f64..1e6, 1..30)) {
        let m = median_norm_estimate(&values).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= m && m <= hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn l2_never_beats_the_optimum(n in 200usize..800, d in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (op, b) = toeplitz_instance(&mut rng, n, d, 0.5);
        let dense = oracle::materialize(&op, 1 << 24).unwrap();
        let opt = oracle::exact_l2(&dense, &DVector::from_column_slice(&b)).unwrap().residual;
        let sol = solve_l2(Arc::new(op), &b, 0.5, 0.25, &SolverConfig::default(), &mut rng).unwrap();
        prop_assert!(sol.residual >= opt * (1.0 - 1e-9));
        let direct = (&dense * DVector::from_vec(sol.x.clone()) - DVector::from_vec(b)).norm();
        prop_assert!((direct - sol.residual).abs() <= 1e-9 * (1.0 + direct));
    }

    #[test]
    fn lowrank_basis_is_orthonormal(n in 20usize..80, d in 10usize..40, k in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = power_law_matrix(&mut rng, n, d, 0.7);
        let op = DenseOperator::new(a.clone());
        let res = lowrank_approx(&op, k, 0.5, &SolverConfig::default(), &mut rng).unwrap();
        prop_assert!((res.z.tr_mul(&res.z) - DMatrix::identity(k, k)).amax() < 1e-9);
        prop_assert!(res.fit >= 0.0);
        let tail = oracle::svd_tail_sq(&a, k).unwrap();
        prop_assert!(res.fit * res.fit >= tail * (1.0 - 1e-9));
    }

    #[test]
    fn poly2_marginals_form_a_distribution(n in 1usize..12, p in 1usize..4, d in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..(n + d - 1) * p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let target: Arc<dyn kernel_ar::TargetAccess> = Arc::new(vec![0.0; n * p * p]);
        let prob = kernel_ar::KernelARProblem::with_target(
            kernel_ar::PointSeries::new(p, data).unwrap(), d, Kernel::quadratic(), target,
        ).unwrap();
        let sampler = kernel_ar::build_poly2_sampler(&prob, &SolverConfig::default(), &mut rng).unwrap();
        let mut total = 0.0;
        for row in 0..n * p * p {
            let (i, a, c) = decode_row(p, row);
            let q = sampler.row_probability(i, a, c);
            prop_assert!(q >= 0.0);
            total += q;
        }
        prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
        let draw = sampler.sample(&mut rng).unwrap();
        prop_assert!(draw.probability > 0.0);
    }
}
