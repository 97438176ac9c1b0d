//! Rank-`k` approximation by ridge-leverage column sampling.
//!
//! Columns of `A` are handled as rows of the transposed view, so the column
//! sampler is repeated halving with ridge scores in place of plain leverage.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::leverage::{sample_rows, LeverageEstimates, SamplingMatrix};
use crate::linalg::{self, DenseMatrix};
use crate::ops::{LinearOperator, RowSubset, Transposed};

#[derive(Debug, Clone)]
pub struct LowRankResult {
    /// `n x k` with orthonormal columns.
    pub z: DenseMatrix,
    /// Sampled columns of `A` and their scales.
    pub sampled_columns: SamplingMatrix,
    /// `||A - Z Z^T A||_F`.
    pub fit: f64,
    /// The sample covered every column, so `Z` spans the exact top-`k` space.
    pub exact: bool,
    /// Some ridge parameter hit its floor because a sample had rank `<= k`.
    pub lambda_floored: bool,
    /// Products with `A` spent on sampling, excluding the fit evaluation.
    pub matvecs_used: u64,
}

/// Ridge scores of the columns of `A` against the dense column sample `c`.
#[derive(Debug, Clone)]
pub struct RidgeScores {
    pub estimates: LeverageEstimates,
    pub lambda: f64,
    pub lambda_floored: bool,
}

/// Final column count `ceil(c_k (k ln k + k / eps^2))`.
pub fn final_column_count(k: usize, eps: f64, cfg: &SolverConfig) -> usize {
    let kf = k as f64;
    (cfg.c_k * (kf * kf.ln() + kf / (eps * eps))).ceil().max(1.0) as usize
}

/// Column count of the constant-factor samples inside the recursion
/// (`eps = 1/2`).
pub fn inner_column_count(k: usize, cfg: &SolverConfig) -> usize {
    final_column_count(k, 0.5, cfg).max(k + 1)
}

/// `a_j^T (C C^T + lambda I)^{-1} a_j` for every column `a_j` of `a`, through
/// `cfg.jl_rows(d)` products with `A^T`.
///
/// With `C = U S V^T`, `(C C^T + lambda I)^{-1} = M^T M` for the stacked factor
/// `M = [diag(1/sqrt(s^2 + lambda)) U^T ; (I - U U^T) / sqrt(lambda)]`, and the
/// scores are squared column norms of `G M A` for a Gaussian `G`.
pub fn ridge_leverage_scores<R: Rng + ?Sized>(
    a: &dyn LinearOperator,
    c: &DenseMatrix,
    k: usize,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<RidgeScores> {
    let n = a.nrows();
    crate::error::check_len("ridge sample height", n, c.nrows())?;
    if c.ncols() == 0 {
        return Err(Error::EmptyInput("ridge column sample"));
    }
    let svd = linalg::sorted_svd(c)?;
    let sv = &svd.singular_values;
    let tail: f64 = sv.iter().skip(k).map(|s| s * s).sum();
    let floor = sv.first().map_or(0.0, |s| s * s) * 1e-12;
    let mut lambda = tail / k as f64;
    let lambda_floored = !(lambda > floor);
    if lambda_floored {
        lambda = floor.max(f64::MIN_POSITIVE);
    }
    let tol = linalg::rank_tolerance(sv, n, c.ncols(), cfg.pinv_rel_tol);
    let rank = sv.iter().filter(|&&s| s > tol && s > 0.0).count();
    let u = svd.u.columns(0, rank).into_owned();
    let kg = cfg.jl_rows(a.ncols());
    let g1 = linalg::gaussian_matrix(kg, rank, rng);
    let g2 = linalg::gaussian_matrix(kg, n, rng);
    let scale = DMatrix::from_diagonal(&DVector::from_iterator(
        rank,
        sv[..rank].iter().map(|s| 1.0 / (s * s + lambda).sqrt()),
    ));
    // G2 (I - U U^T) / sqrt(lambda)
    let g2u = &g2 * &u;
    let complement = (&g2 - g2u * u.transpose()) / lambda.sqrt();
    let sketch = g1 * scale * u.transpose() + complement;
    let mut scores = vec![0.0; a.ncols()];
    for q in 0..kg {
        let row: Vec<f64> = sketch.row(q).iter().copied().collect();
        let y = a.apply_transpose(&row)?;
        for (s, v) in scores.iter_mut().zip(&y) {
            *s += v * v;
        }
    }
    for s in scores.iter_mut() {
        *s /= kg as f64;
    }
    Ok(RidgeScores {
        estimates: LeverageEstimates {
            scores,
            claimed_factor: 2.0,
        },
        lambda,
        lambda_floored,
    })
}

struct ColumnSampler<'a> {
    a: &'a dyn LinearOperator,
    view: Transposed<'a>,
    k: usize,
    inner: usize,
    cfg: &'a SolverConfig,
    floored: bool,
}

impl ColumnSampler<'_> {
    /// Sample of `target` columns from `cols`, as a row sample of `A^T`.
    fn sample<R: Rng + ?Sized>(
        &mut self,
        cols: Vec<usize>,
        target: usize,
        rng: &mut R,
    ) -> Result<SamplingMatrix> {
        let d = self.a.ncols();
        let len = cols.len();
        if len <= self.inner.max(target) {
            let samples = cols.iter().map(|&j| (j, 1.0)).collect();
            return Ok(SamplingMatrix::from_samples(d, samples));
        }
        let mut half: Vec<usize> = index::sample(rng, len, len.div_ceil(2))
            .into_iter()
            .map(|t| cols[t])
            .collect();
        half.sort_unstable();
        let reference = self.sample(half, self.inner, rng)?;
        let c = reference.apply_to(&self.view)?.transpose();
        let sub = RowSubset::new(&self.view, cols)?;
        let restricted = Transposed::new(&sub);
        let ridge = ridge_leverage_scores(&restricted, &c, self.k, self.cfg, rng)?;
        self.floored |= ridge.lambda_floored;
        let local = sample_rows(&ridge.estimates.scores, target, rng)?;
        let samples = local
            .samples()
            .iter()
            .map(|&(t, s)| (sub.indices()[t], s))
            .collect();
        Ok(SamplingMatrix::from_samples(d, samples))
    }
}

/// `Z` with `||A - Z Z^T A||_F^2 <= (1 + eps) ||A - A_k||_F^2` with constant
/// probability. `Z` holds the top-`k` left singular vectors of the sampled and
/// rescaled columns.
pub fn lowrank_approx<R: Rng + ?Sized>(
    a: &dyn LinearOperator,
    k: usize,
    eps: f64,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<LowRankResult> {
    let (n, d) = (a.nrows(), a.ncols());
    if k == 0 || k > n.min(d) {
        return Err(Error::InvalidParameter(format!(
            "rank {k} outside [1, {}]",
            n.min(d)
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    let start = a.matvec_count();
    let target = final_column_count(k, eps, cfg);
    let mut sampler = ColumnSampler {
        a,
        view: Transposed::new(a),
        k,
        inner: inner_column_count(k, cfg),
        cfg,
        floored: false,
    };
    let exact = k == n.min(d) || target >= d;
    let sampled_columns = if exact {
        SamplingMatrix::identity(d)
    } else {
        sampler.sample((0..d).collect(), target, rng)?
    };
    let c = sampled_columns.apply_to(&sampler.view)?.transpose();
    let matvecs_used = a.matvec_count() - start;
    let svd = linalg::sorted_svd(&c)?;
    let z = svd.u.columns(0, k).into_owned();
    let fit = projection_residual_sq(a, &z)?.sqrt();
    Ok(LowRankResult {
        z,
        sampled_columns,
        fit,
        exact,
        lambda_floored: sampler.floored,
        matvecs_used,
    })
}

/// `||A - Z Z^T A||_F^2`, accumulated one column block at a time so that a
/// near-exact fit does not cancel against `||A||_F^2`.
pub fn projection_residual_sq(a: &dyn LinearOperator, z: &DenseMatrix) -> Result<f64> {
    crate::error::check_len("projection basis height", a.nrows(), z.nrows())?;
    let d = a.ncols();
    let mut total = 0.0;
    let mut start = 0;
    while start < d {
        let end = (start + 64).min(d);
        let idx: Vec<usize> = (start..end).collect();
        let block = a.columns(&idx)?;
        let resid = &block - z * z.tr_mul(&block);
        total += resid.norm_squared();
        start = end;
    }
    Ok(total)
}
