//! Exact normal-equations solve for dot-product kernels.
//!
//! Block `i` pairs points `i + d - 1 - j` and `i + d - 1 - j'`, which sit
//! `|j - j'|` apart. So the Gram matrix only needs inner products of points
//! at most `d - 1` apart, and each diagonal band of the Gram matrix is a
//! sliding window sum over one band of kernel values.

use nalgebra::{DMatrix, DVector};

use super::problem::{KernelARProblem, Target};
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

/// `values[delta][s] = <x_s, x_{s + delta}>` for `delta < d`, `s + delta < len`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandTable {
    pub len: usize,
    pub values: Vec<Vec<f64>>,
    /// Inner products computed to fill the table.
    pub evaluations: u64,
}

impl BandTable {
    pub fn width(&self) -> usize {
        self.values.len()
    }

    /// `<x_s, x_t>` for `|s - t| < width`.
    pub fn get(&self, s: usize, t: usize) -> Option<f64> {
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        self.values.get(hi - lo).and_then(|band| band.get(lo)).copied()
    }
}

/// Number of unordered point pairs `{s, t}` with `|s - t| <= d - 1` among
/// `len` points: `d len - d (d - 1) / 2` once `len >= d`.
pub fn band_pair_count(len: usize, d: usize) -> u64 {
    let w = d.min(len);
    (w * len - w * (w - 1) / 2) as u64
}

/// Inner products of the first `len` points of `problem`'s series that the
/// Gram matrix needs, each computed once.
pub fn banded_inner_products(problem: &KernelARProblem) -> BandTable {
    let len = problem.n() + problem.d() - 1;
    let series = problem.series();
    let width = problem.d().min(len);
    let mut evaluations = 0;
    let values = (0..width)
        .map(|delta| {
            (0..len - delta)
                .map(|s| {
                    evaluations += 1;
                    linalg::dot(series.point(s), series.point(s + delta))
                })
                .collect()
        })
        .collect();
    BandTable {
        len,
        values,
        evaluations,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandGram {
    pub gram: DenseMatrix,
    /// Kernel evaluations `f(<x_s, x_t>)`, one per band entry.
    pub kernel_evaluations: u64,
    /// Additions and subtractions spent on the window sums.
    pub arithmetic: u64,
}

/// `phi(A)^T phi(A)` from the band table.
///
/// `G[j][j + delta] = sum_i F[delta][i + d - 1 - j - delta]` with `F` the
/// kernel applied to band `delta`. Stepping `j` to `j + 1` moves the window
/// one step toward the start, so each entry after the first on a band costs
/// one subtraction and one addition.
pub fn gram_via_bands(problem: &KernelARProblem, bands: &BandTable) -> Result<BandGram> {
    let (n, d) = (problem.n(), problem.d());
    let kernel = problem.kernel();
    let mut kernel_evaluations = 0;
    let mut f = Vec::with_capacity(bands.width());
    for (delta, band) in bands.values.iter().enumerate() {
        let mut row = Vec::with_capacity(band.len());
        for (s, &t) in band.iter().enumerate() {
            kernel_evaluations += 1;
            let v = kernel.eval(t);
            if !v.is_finite() {
                return Err(Error::KernelNonFinite { s, t: s + delta });
            }
            row.push(v);
        }
        f.push(row);
    }
    let mut gram = DMatrix::zeros(d, d);
    let mut arithmetic = 0u64;
    for delta in 0..d {
        let band = &f[delta];
        let mut start = d - 1 - delta;
        let mut sum: f64 = band[start..start + n].iter().sum();
        arithmetic += n as u64;
        gram[(0, delta)] = sum;
        for j in 1..d - delta {
            // window [start, start + n) -> [start - 1, start + n - 1)
            sum += band[start - 1] - band[start + n - 1];
            start -= 1;
            arithmetic += 2;
            gram[(j, j + delta)] = sum;
        }
    }
    gram.fill_lower_triangle_with_upper_triangle();
    Ok(BandGram {
        gram,
        kernel_evaluations,
        arithmetic,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSolution {
    pub x: Vec<f64>,
    pub gram: DenseMatrix,
    /// `phi(A)^T b`
    pub rhs: Vec<f64>,
    /// `||phi(A) x - b||_2` expanded through the kernel; clamped at zero.
    pub residual: f64,
    pub rank_deficient: bool,
    pub band_inner_products: u64,
    pub kernel_evaluations: u64,
    /// Inner products spent on `phi(A)^T b` and `||b||^2`.
    pub rhs_inner_products: u64,
}

/// `x = Gram^+ phi(A)^T b` for the lifted-series target.
///
/// `(phi(A)^T b)_j = sum_i f(<x_{i+d-1-j}, c_i>)`: `n d` kernel evaluations.
pub fn general_kernel_solve(problem: &KernelARProblem, pinv_rel_tol: f64) -> Result<KernelSolution> {
    if !matches!(problem.target(), Target::LiftedSeries) {
        return Err(Error::InvalidParameter(
            "the exact kernel solver needs the lifted-series target".into(),
        ));
    }
    let (n, d) = (problem.n(), problem.d());
    let bands = banded_inner_products(problem);
    let bg = gram_via_bands(problem, &bands)?;
    let kernel = problem.kernel();
    let mut rhs = vec![0.0; d];
    let mut b_sq = 0.0;
    let mut rhs_inner_products = 0u64;
    let mut kernel_evaluations = bg.kernel_evaluations;
    for i in 0..n {
        let c = problem.target_point(i).expect("lifted-series target");
        for (j, r) in rhs.iter_mut().enumerate() {
            let v = kernel.eval(linalg::dot(problem.block_point(i, j), c));
            if !v.is_finite() {
                return Err(Error::KernelNonFinite { s: i + d - 1 - j, t: i + d });
            }
            *r += v;
        }
        b_sq += kernel.eval(linalg::dot(c, c));
        rhs_inner_products += d as u64 + 1;
        kernel_evaluations += d as u64 + 1;
    }
    let sol = linalg::lstsq(&bg.gram, &DVector::from_column_slice(&rhs), pinv_rel_tol)?;
    let x: Vec<f64> = sol.x.iter().copied().collect();
    let gx = &bg.gram * &sol.x;
    let resid_sq = b_sq - 2.0 * linalg::dot(&x, &rhs) + linalg::dot(&x, gx.as_slice());
    Ok(KernelSolution {
        x,
        gram: bg.gram,
        rhs,
        residual: resid_sq.max(0.0).sqrt(),
        rank_deficient: sol.rank_deficient,
        band_inner_products: bands.evaluations,
        kernel_evaluations,
        rhs_inner_products,
    })
}
