//! Approximate least squares through operator access, and its autoregressive
//! and dynamical-system specializations.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use crate::config::SolverConfig;
use crate::error::{check_finite, check_len, Error, Result};
use crate::leverage::{repeated_halving, SamplingMatrix};
use crate::linalg;
use crate::ops::{
    ar_design_operator, AugmentedOperator, ComposedOperator, DiagonalOperator, DifferenceOperator,
    IdentityOperator, LinearOperator,
};
use crate::oracle;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct L2Solution {
    pub x: Vec<f64>,
    /// `||A x - b||_2`, evaluated with one operator product.
    pub residual: f64,
    pub repetitions_used: usize,
    /// Products with `A` during the solve.
    pub matvecs_used: u64,
    pub rank_deficient: bool,
    /// Sample behind the returned candidate; identity for the exact fallback.
    pub sample: SamplingMatrix,
    /// The dense fallback ran instead of sampling.
    pub exact: bool,
}

/// Rows per repetition: `ceil(c_s (d+1)(ln(d+1) + 1) / eps^2)`.
pub fn l2_sample_size(d: usize, eps: f64, cfg: &SolverConfig) -> usize {
    let m = (d + 1) as f64;
    (cfg.c_s * m * (m.ln() + 1.0) / (eps * eps)).ceil() as usize
}

/// `max(1, ceil(log2(1/delta)))`.
pub fn boosting_repetitions(delta: f64) -> usize {
    ((1.0 / delta).log2().ceil() as usize).max(1)
}

fn validate(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(())
}

struct Candidate {
    x: Vec<f64>,
    residual: f64,
    rank_deficient: bool,
    sample: SamplingMatrix,
}

/// `x` with `||A x - b|| <= (1 + eps) min ||A x - b||` with probability
/// `>= 1 - delta`.
///
/// Each of `ceil(log2(1/delta))` repetitions samples `[A, b]` by repeated
/// halving and solves the sampled problem; the candidate with the smallest
/// true residual wins, ties going to the earliest repetition. Repetitions run
/// in parallel on seeds derived from one draw of `rng`.
pub fn solve_l2<R: Rng + ?Sized>(
    a: Arc<dyn LinearOperator>,
    b: &[f64],
    eps: f64,
    delta: f64,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<L2Solution> {
    validate(eps, delta)?;
    let (n, d) = (a.nrows(), a.ncols());
    check_len("least squares rhs", n, b.len())?;
    check_finite("least squares rhs", b)?;
    let start = a.matvec_count();
    if n <= d {
        let dense = oracle::materialize(a.as_ref(), cfg.materialize_cap)?;
        let sol = linalg::lstsq(&dense, &DVector::from_column_slice(b), cfg.pinv_rel_tol)?;
        let x: Vec<f64> = sol.x.iter().copied().collect();
        let residual = residual(a.as_ref(), &x, b)?;
        return Ok(L2Solution {
            x,
            residual,
            repetitions_used: 1,
            matvecs_used: a.matvec_count() - start,
            rank_deficient: sol.rank_deficient,
            sample: SamplingMatrix::identity(n),
            exact: true,
        });
    }
    let c = AugmentedOperator::new(a.clone(), b.to_vec())?;
    let r = l2_sample_size(d, eps, cfg);
    let reps = boosting_repetitions(delta);
    let base = rng::fork(rng);
    let candidates: Vec<Result<Candidate>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut local = rng::derived(base, rep as u64);
            let (sample, sampled) = repeated_halving(&c, r, eps, cfg, &mut local)?;
            let sa = sampled.columns(0, d).into_owned();
            let sb = sampled.column(d).into_owned();
            let sol = linalg::lstsq(&sa, &sb, cfg.pinv_rel_tol)?;
            let x: Vec<f64> = sol.x.iter().copied().collect();
            let residual = residual(a.as_ref(), &x, b)?;
            Ok(Candidate {
                x,
                residual,
                rank_deficient: sol.rank_deficient,
                sample,
            })
        })
        .collect();
    let mut best: Option<Candidate> = None;
    for cand in candidates {
        let cand = cand?;
        if best.as_ref().is_none_or(|b| cand.residual < b.residual) {
            best = Some(cand);
        }
    }
    let best = best.expect("at least one repetition");
    Ok(L2Solution {
        x: best.x,
        residual: best.residual,
        repetitions_used: reps,
        matvecs_used: a.matvec_count() - start,
        rank_deficient: best.rank_deficient,
        sample: best.sample,
        exact: false,
    })
}

fn residual(a: &dyn LinearOperator, x: &[f64], b: &[f64]) -> Result<f64> {
    let ax = a.apply(x)?;
    Ok(ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt())
}

/// Rows `i = 0..n` regress `series[i + d]` on `(series[i+d-1], ..., series[i])`,
/// with `n = series.len() - d`.
pub fn ar_system(series: &[f64], d: usize, cfg: &SolverConfig) -> Result<(Arc<dyn LinearOperator>, Vec<f64>)> {
    if d == 0 {
        return Err(Error::InvalidParameter("lag order must be positive".into()));
    }
    if series.len() < d + 1 {
        return Err(Error::SeriesTooShort {
            needed: d + 1,
            actual: series.len(),
        });
    }
    check_finite("series", series)?;
    let n = series.len() - d;
    let op = ar_design_operator(series, n, d, cfg.allow_underdetermined)?;
    Ok((Arc::new(op), series[d..].to_vec()))
}

/// AR(`d`) coefficients `x` with `b_t ~ sum_l x_l b_{t-l}`.
pub fn solve_autoregression<R: Rng + ?Sized>(
    series: &[f64],
    d: usize,
    eps: f64,
    delta: f64,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<L2Solution> {
    let (a, b) = ar_system(series, d, cfg)?;
    solve_l2(a, &b, eps, delta, cfg, rng)
}

/// The operator `T U D` for step `h`, with `U` replaced by the identity when
/// `cfg.dynamical_identity_u` is set.
pub fn dynamical_system(
    series: &[f64],
    d: usize,
    h: f64,
    cfg: &SolverConfig,
) -> Result<(Arc<dyn LinearOperator>, Vec<f64>)> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step h = {h} must be positive")));
    }
    if d > 1 && h < 1.0 {
        let exponent = (d - 1) as f64 * -h.ln();
        if exponent >= f64::MAX.ln() {
            return Err(Error::ScaleOverflow {
                h,
                d,
                min_h: (-f64::MAX.ln() / (d - 1) as f64).exp(),
            });
        }
    }
    let (t, b) = ar_system(series, d, cfg)?;
    let u: Arc<dyn LinearOperator> = if cfg.dynamical_identity_u {
        Arc::new(IdentityOperator::new(d))
    } else {
        Arc::new(DifferenceOperator::new(d))
    };
    let dd: Arc<dyn LinearOperator> = Arc::new(DiagonalOperator::inverse_powers(h, d));
    let a = ComposedOperator::new(vec![t, u, dd])?;
    Ok((Arc::new(a), b))
}

/// Least squares over `A = T U D` with `T` the autoregressive design.
pub fn solve_dynamical<R: Rng + ?Sized>(
    series: &[f64],
    d: usize,
    h: f64,
    eps: f64,
    delta: f64,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<L2Solution> {
    let (a, b) = dynamical_system(series, d, h, cfg)?;
    solve_l2(a, &b, eps, delta, cfg, rng)
}
