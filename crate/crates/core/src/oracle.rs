//! Dense brute-force references.
//!
//! These routines materialize everything and use textbook factorizations.
//! They back the test suites and the CLI's `--exact` mode, and they share no
//! code path with the randomized solvers beyond the basic SVD helper.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel_ar::KernelARProblem;
use crate::linalg::{self, DenseMatrix, SortedSvd};
use crate::ops::LinearOperator;

const ORACLE_REL_TOL: f64 = 1e-14;

/// Dense form through one product per basis vector.
pub fn materialize(op: &dyn LinearOperator, cap: usize) -> Result<DenseMatrix> {
    let (n, d) = (op.nrows(), op.ncols());
    if n.saturating_mul(d) > cap {
        return Err(Error::SizeCap { rows: n, cols: d, cap });
    }
    let mut out = DMatrix::zeros(n, d);
    let mut e = vec![0.0; d];
    for j in 0..d {
        e[j] = 1.0;
        let col = op.apply(&e)?;
        e[j] = 0.0;
        out.column_mut(j).copy_from_slice(&col);
    }
    Ok(out)
}

/// `A[i][j] = g[i - j + d - 1]` by direct indexing.
pub fn toeplitz_dense(g: &[f64], n: usize, d: usize) -> DenseMatrix {
    DMatrix::from_fn(n, d, |i, j| g[i + d - 1 - j])
}

pub struct ExactL2 {
    pub x: DVector<f64>,
    pub residual: f64,
}

/// Least squares through Householder QR; minimum-norm SVD solve when the
/// triangular factor is singular.
pub fn exact_l2(a: &DenseMatrix, b: &DVector<f64>) -> Result<ExactL2> {
    let x = if a.nrows() >= a.ncols() && a.ncols() > 0 {
        let qr = a.clone().qr();
        let r = qr.r();
        let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let singular = r
            .diagonal()
            .iter()
            .any(|v| v.abs() <= diag_max * a.nrows() as f64 * 1e-13);
        if singular {
            linalg::lstsq(a, b, ORACLE_REL_TOL)?.x
        } else {
            let qtb = qr.q().tr_mul(b);
            r.solve_upper_triangular(&qtb)
                .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?
        }
    } else {
        linalg::lstsq(a, b, ORACLE_REL_TOL)?.x
    };
    let residual = (a * &x - b).norm();
    Ok(ExactL2 { x, residual })
}

/// Least squares through the normal equations (Cholesky of `A^T A`).
pub fn exact_l2_normal(a: &DenseMatrix, b: &DVector<f64>) -> Result<ExactL2> {
    let gram = a.tr_mul(a);
    let rhs = a.tr_mul(b);
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Numerical("normal equations are not positive definite".into()))?;
    let x = chol.solve(&rhs);
    let residual = (a * &x - b).norm();
    Ok(ExactL2 { x, residual })
}

pub struct ExactLp {
    pub x: DVector<f64>,
    /// `||Ax - b||_p`
    pub cost: f64,
    pub iterations: usize,
}

fn lp_cost(a: &DenseMatrix, b: &DVector<f64>, x: &DVector<f64>, p: f64) -> f64 {
    let r = a * x - b;
    r.iter().map(|v| v.abs().powf(p)).sum::<f64>()
}

/// `min ||Ax - b||_p` by iteratively reweighted least squares with a
/// backtracking guard, run until the relative cost change drops below 1e-10.
pub fn exact_lp(a: &DenseMatrix, b: &DVector<f64>, p: f64) -> Result<ExactLp> {
    if !(1.0..4.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [1, 4)")));
    }
    let p_eff = if p == 1.0 { 1.0 + 1e-9 } else { p };
    let mut x = exact_l2(a, b)?.x;
    let mut cost = lp_cost(a, b, &x, p_eff);
    let mut iterations = 0;
    for it in 0..20_000 {
        iterations = it + 1;
        if cost == 0.0 {
            break;
        }
        let r = a * &x - b;
        let w: Vec<f64> = r
            .iter()
            .map(|v| v.abs().max(1e-12).powf(p_eff - 2.0).sqrt())
            .collect();
        let aw = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * w[i]);
        let bw = DVector::from_fn(b.len(), |i, _| b[i] * w[i]);
        let candidate = linalg::lstsq(&aw, &bw, ORACLE_REL_TOL)?.x;
        let mut step = 1.0;
        let mut next = candidate.clone();
        let mut next_cost = lp_cost(a, b, &next, p_eff);
        while next_cost > cost && step > 1e-6 {
            step *= 0.5;
            next = &x + (&candidate - &x) * step;
            next_cost = lp_cost(a, b, &next, p_eff);
        }
        if next_cost > cost {
            break;
        }
        let rel = (cost - next_cost) / cost;
        x = next;
        cost = next_cost;
        if rel < 1e-10 {
            break;
        }
    }
    let cost = lp_cost(a, b, &x, p).powf(1.0 / p);
    Ok(ExactLp { x, cost, iterations })
}

pub fn exact_svd(a: &DenseMatrix) -> Result<SortedSvd> {
    linalg::sorted_svd(a)
}

/// `||A - A_k||_F^2`.
pub fn svd_tail_sq(a: &DenseMatrix, k: usize) -> Result<f64> {
    let s = exact_svd(a)?;
    Ok(s.singular_values.iter().skip(k).map(|v| v * v).sum())
}

/// Classical leverage scores `a_i^T (A^T A)^+ a_i`.
pub fn exact_leverage(a: &DenseMatrix) -> Result<Vec<f64>> {
    let s = exact_svd(a)?;
    let tol = linalg::rank_tolerance(&s.singular_values, a.nrows(), a.ncols(), ORACLE_REL_TOL);
    let rank = s.singular_values.iter().filter(|&&v| v > tol).count();
    Ok((0..a.nrows())
        .map(|i| (0..rank).map(|k| s.u[(i, k)].powi(2)).sum())
        .collect())
}

/// `c_i^T (B^T B)^+ c_i` for every row of `c`.
pub fn exact_generalized_leverage(c: &DenseMatrix, b: &DenseMatrix) -> Result<Vec<f64>> {
    let (gram_pinv, _) = linalg::pinv(&b.tr_mul(b), 1e-12)?;
    Ok((0..c.nrows())
        .map(|i| {
            let row = c.row(i).transpose();
            (row.transpose() * &gram_pinv * &row)[(0, 0)]
        })
        .collect())
}

/// Ridge leverage of every column of `a` against the column sample `c`,
/// with `lambda = ||C - C_k||_F^2 / k`.
pub fn exact_ridge_leverage(a: &DenseMatrix, c: &DenseMatrix, k: usize) -> Result<Vec<f64>> {
    let lambda = svd_tail_sq(c, k)? / k as f64;
    let n = a.nrows();
    let m = &(c * c.transpose()) + DMatrix::identity(n, n) * lambda;
    let (inv, _) = linalg::pinv(&m, 1e-15)?;
    Ok((0..a.ncols())
        .map(|j| {
            let col = a.column(j);
            (col.transpose() * &inv * col)[(0, 0)]
        })
        .collect())
}

/// Lewis weights by running the fixed point until it stalls.
pub fn exact_lewis(c: &DenseMatrix, p: f64) -> Result<Vec<f64>> {
    let n = c.nrows();
    let mut w = vec![1.0f64; n];
    for _ in 0..10_000 {
        let mut m = DMatrix::zeros(c.ncols(), c.ncols());
        for i in 0..n {
            if w[i] > 0.0 {
                let row = c.row(i);
                m += row.transpose() * row * w[i].powf(1.0 - 2.0 / p);
            }
        }
        let (inv, _) = linalg::pinv(&m, 1e-15)?;
        let mut change: f64 = 0.0;
        for i in 0..n {
            let row = c.row(i);
            let q = (row * &inv * row.transpose())[(0, 0)].max(0.0);
            let next = q.powf(p / 2.0);
            if w[i] > 0.0 {
                change = change.max((next - w[i]).abs() / w[i]);
            }
            w[i] = next;
        }
        if change < 1e-14 {
            break;
        }
    }
    Ok(w)
}

/// Explicit `phi(A)` (`n p^2 x d`) and `b` for the degree-2 kernel.
pub fn exact_poly2_lift(problem: &KernelARProblem) -> Result<(DenseMatrix, DVector<f64>)> {
    let (n, d, p) = (problem.n(), problem.d(), problem.p());
    let rows = n * p * p;
    let mut phi = DMatrix::zeros(rows, d);
    let mut b = DVector::zeros(rows);
    for i in 0..n {
        for a in 0..p {
            for c in 0..p {
                let r = i * p * p + a * p + c;
                for l in 0..d {
                    let x = problem.block_point(i, l);
                    phi[(r, l)] = x[a] * x[c];
                }
                b[r] = problem.peek_target(i, a, c);
            }
        }
    }
    Ok((phi, b))
}

/// `phi(A)^T phi(A)` by evaluating all `n d^2` kernel entries block by block.
pub fn naive_kernel_gram(problem: &KernelARProblem) -> DenseMatrix {
    let d = problem.d();
    let mut g = DMatrix::zeros(d, d);
    for i in 0..problem.n() {
        for j in 0..d {
            for jj in 0..d {
                let t = linalg::dot(problem.block_point(i, j), problem.block_point(i, jj));
                g[(j, jj)] += problem.kernel().eval(t);
            }
        }
    }
    g
}

/// `phi(A)^T b` for the lifted-series target, term by term.
pub fn naive_kernel_rhs(problem: &KernelARProblem) -> Option<DVector<f64>> {
    let d = problem.d();
    let mut r = DVector::zeros(d);
    for i in 0..problem.n() {
        let c = problem.target_point(i)?;
        for j in 0..d {
            r[j] += problem.kernel().eval(linalg::dot(problem.block_point(i, j), c));
        }
    }
    Some(r)
}

/// Stacked linear-kernel (vector autoregression) design and target.
pub fn stacked_var_system(problem: &KernelARProblem) -> Option<(DenseMatrix, DVector<f64>)> {
    let (n, d, p) = (problem.n(), problem.d(), problem.p());
    let mut a = DMatrix::zeros(n * p, d);
    let mut b = DVector::zeros(n * p);
    for i in 0..n {
        let c = problem.target_point(i)?;
        for r in 0..p {
            for l in 0..d {
                a[(i * p + r, l)] = problem.block_point(i, l)[r];
            }
            b[i * p + r] = c[r];
        }
    }
    Some((a, b))
}
