//! `l_p` regression for `p` in `[1, 4)` through Lewis-weight row sampling.
//!
//! The Lewis quadratic form is built recursively: halve the rows, get the form
//! of the half, use it to estimate `c_i^T Q^+ c_i` for every row through a
//! Gaussian sketch, keep each row independently with probability derived from
//! that estimate, and run the dense Lewis fixed point on the kept rows. The
//! final sample is drawn i.i.d. proportional to the estimated weights and
//! solved by IRLS.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;

use crate::config::SolverConfig;
use crate::error::{check_finite, check_len, Error, Result};
use crate::leverage::SamplingMatrix;
use crate::linalg::{self, DenseMatrix};
use crate::ops::{AugmentedOperator, LinearOperator, RowSubset};
use crate::{oracle, rng};

/// Lewis weights with their quadratic form `Q = C^T W^{1-2/p} C = F^T F`.
#[derive(Debug, Clone)]
pub struct LewisState {
    pub p: f64,
    pub weights: Vec<f64>,
    pub q: DenseMatrix,
    /// Symmetric square root of `Q`.
    pub factor: DenseMatrix,
    pub converged: bool,
    pub iterations: usize,
    /// The expected sample size was capped at some level of the recursion.
    pub theta_reduced: bool,
}

fn check_p(p: f64) -> Result<()> {
    if !(1.0..4.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [1, 4)")));
    }
    Ok(())
}

fn weighted_form(c: &DenseMatrix, w: &[f64], p: f64) -> DenseMatrix {
    let m = c.ncols();
    let mut q = DMatrix::zeros(m, m);
    let e = 1.0 - 2.0 / p;
    for (i, &wi) in w.iter().enumerate() {
        if wi > 0.0 {
            let row = c.row(i);
            q.syger(wi.powf(e), &row.transpose(), &row.transpose(), 1.0);
        }
    }
    q.fill_upper_triangle_with_lower_triangle();
    q
}

fn quadratic_forms(c: &DenseMatrix, inv: &DenseMatrix) -> Vec<f64> {
    let ci = c * inv;
    (0..c.nrows())
        .map(|i| ci.row(i).dot(&c.row(i)).max(0.0))
        .collect()
}

/// Dense fixed point `w_i = (c_i^T (C^T W^{1-2/p} C)^+ c_i)^{p/2}`, iterated
/// until the largest relative change is at most `tol`.
pub fn lewis_weights_fixed_point(
    c: &DenseMatrix,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LewisState> {
    check_p(p)?;
    if c.nrows() == 0 {
        return Err(Error::EmptyInput("Lewis weight rows"));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Lewis weight input"));
    }
    let zero_row: Vec<bool> = (0..c.nrows()).map(|i| c.row(i).iter().all(|&v| v == 0.0)).collect();
    let mut w: Vec<f64> = zero_row.iter().map(|&z| if z { 0.0 } else { 1.0 }).collect();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let q = weighted_form(c, &w, p);
        let (inv, _) = linalg::pinv(&q, 1e-14)?;
        let next: Vec<f64> = quadratic_forms(c, &inv)
            .into_iter()
            .zip(&zero_row)
            .map(|(t, &z)| if z { 0.0 } else { t.powf(p / 2.0) })
            .collect();
        let change = w
            .iter()
            .zip(&next)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| (a - b).abs() / a)
            .fold(0.0, f64::max);
        w = next;
        if change <= tol {
            converged = true;
            break;
        }
    }
    let q = weighted_form(c, &w, p);
    let (_, factor, _) = linalg::psd_roots(&q, 1e-14);
    Ok(LewisState {
        p,
        weights: w,
        q,
        factor,
        converged,
        iterations,
        theta_reduced: false,
    })
}

struct FormBuilder<'a> {
    root: &'a dyn LinearOperator,
    p: f64,
    cfg: &'a SolverConfig,
    theta_reduced: bool,
    converged: bool,
}

impl FormBuilder<'_> {
    /// `c_i^T Q^+ c_i` for every row in `rows`, as `||G Q^{+1/2} c_i||^2 / k`.
    fn row_forms<R: Rng + ?Sized>(&self, rows: Vec<usize>, q: &DenseMatrix, rng: &mut R) -> Result<Vec<f64>> {
        let sub = RowSubset::new(self.root, rows)?;
        let (inv_root, _, _) = linalg::psd_roots(q, 1e-13);
        let k = self.cfg.jl_rows(sub.nrows());
        let sketch = linalg::gaussian_matrix(k, q.nrows(), rng) * inv_root;
        let mut u = vec![0.0; sub.nrows()];
        for t in 0..k {
            let row: Vec<f64> = sketch.row(t).iter().copied().collect();
            let y = sub.apply(&row)?;
            for (acc, v) in u.iter_mut().zip(&y) {
                *acc += v * v;
            }
        }
        for acc in u.iter_mut() {
            *acc /= k as f64;
        }
        Ok(u)
    }

    fn form<R: Rng + ?Sized>(&mut self, rows: Vec<usize>, rng: &mut R) -> Result<DenseMatrix> {
        let n = rows.len();
        let m = self.root.ncols();
        if n <= m {
            return self.dense_form(&rows, &vec![1.0; n]);
        }
        let mut half: Vec<usize> = index::sample(rng, n, n.div_ceil(2))
            .into_iter()
            .map(|t| rows[t])
            .collect();
        half.sort_unstable();
        let q_half = self.form(half, rng)?;
        let u = self.row_forms(rows.clone(), &q_half, rng)?;
        let mf = m.max(2) as f64;
        let scale = self.cfg.c_theta * mf.powf(self.p / 2.0) * mf.ln();
        let mut probs: Vec<f64> = u.iter().map(|&ui| (scale * ui.powf(self.p / 2.0)).min(1.0)).collect();
        let expected: f64 = probs.iter().sum();
        let cap = n as f64 / 2.0;
        if expected > cap {
            self.theta_reduced = true;
            if cap < 4.0 * mf * mf.ln() {
                return self.dense_form(&rows, &vec![1.0; n]);
            }
            let shrink = cap / expected;
            for pr in probs.iter_mut() {
                *pr *= shrink;
            }
        }
        let mut kept = Vec::new();
        let mut scales = Vec::new();
        for (t, &pr) in probs.iter().enumerate() {
            if pr > 0.0 && rng.random::<f64>() < pr {
                kept.push(rows[t]);
                scales.push(pr.powf(-1.0 / self.p));
            }
        }
        if kept.len() < m {
            return self.dense_form(&rows, &vec![1.0; n]);
        }
        self.dense_form(&kept, &scales)
    }

    fn dense_form(&mut self, rows: &[usize], scales: &[f64]) -> Result<DenseMatrix> {
        let mut c = self.root.rows(rows)?;
        for (t, &s) in scales.iter().enumerate() {
            c.row_mut(t).scale_mut(s);
        }
        let state = lewis_weights_fixed_point(&c, self.p, self.cfg.lewis_tol, self.cfg.lewis_max_iter)?;
        self.converged &= state.converged;
        Ok(state.q)
    }
}

/// Lewis form of `C` through products with `C`. The returned weights are the
/// estimates `(c_i^T Q^+ c_i)^{p/2}` for every row of `C`.
pub fn approx_lewis_form<R: Rng + ?Sized>(
    c: &dyn LinearOperator,
    p: f64,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<LewisState> {
    check_p(p)?;
    let n = c.nrows();
    if n == 0 {
        return Err(Error::EmptyInput("operator rows"));
    }
    let mut builder = FormBuilder {
        root: c,
        p,
        cfg,
        theta_reduced: false,
        converged: true,
    };
    let all: Vec<usize> = (0..n).collect();
    if n <= c.ncols() {
        let dense = c.rows(&all)?;
        return lewis_weights_fixed_point(&dense, p, cfg.lewis_tol, cfg.lewis_max_iter);
    }
    let q = builder.form(all.clone(), rng)?;
    let u = builder.row_forms(all, &q, rng)?;
    let weights = u.iter().map(|t| t.powf(p / 2.0)).collect();
    let (_, factor, _) = linalg::psd_roots(&q, 1e-14);
    Ok(LewisState {
        p,
        weights,
        q,
        factor,
        converged: builder.converged,
        iterations: 0,
        theta_reduced: builder.theta_reduced,
    })
}

/// `r` i.i.d. rows with `q_i ~ weights_i`, scaled by `(r q_i)^{-1/p}`.
pub fn sample_lewis_rows<R: Rng + ?Sized>(
    weights: &[f64],
    r: usize,
    p: f64,
    rng: &mut R,
) -> Result<SamplingMatrix> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroScores);
    }
    let dist = WeightedIndex::new(weights).map_err(|_| Error::ZeroScores)?;
    let samples = (0..r)
        .map(|_| {
            let j = dist.sample(rng);
            (j, (r as f64 * weights[j] / total).powf(-1.0 / p))
        })
        .collect();
    Ok(SamplingMatrix::from_samples(weights.len(), samples))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrlsResult {
    pub x: DVector<f64>,
    /// `sum |a_i^T x - b_i|^p`
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn power_cost(a: &DenseMatrix, b: &DVector<f64>, x: &DVector<f64>, p: f64) -> f64 {
    (a * x - b).iter().map(|r| r.abs().powf(p)).sum()
}

/// Iteratively reweighted least squares for `min ||Ax - b||_p^p`.
///
/// Weights are `max(|r_i|, clamp)^{p-2}`. A step that raises the cost is
/// pulled back toward the current iterate by `cfg.irls_damping` up to 30
/// times; stops when the relative cost change falls below `tol`.
pub fn irls(a: &DenseMatrix, b: &DVector<f64>, p: f64, tol: f64, cfg: &SolverConfig) -> Result<IrlsResult> {
    check_p(p)?;
    let p_eff = if p == 1.0 { 1.0 + 1e-9 } else { p };
    let mut x = linalg::lstsq(a, b, cfg.pinv_rel_tol)?.x;
    let mut cost = power_cost(a, b, &x, p_eff);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.irls_max_iter {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let r = a * &x - b;
        let sw: Vec<f64> = r
            .iter()
            .map(|v| v.abs().max(cfg.irls_weight_clamp).powf((p_eff - 2.0) / 2.0))
            .collect();
        let aw = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * sw[i]);
        let bw = DVector::from_fn(b.len(), |i, _| b[i] * sw[i]);
        let full = linalg::lstsq(&aw, &bw, cfg.pinv_rel_tol)?.x;
        let mut step = 1.0;
        let mut next = full.clone();
        let mut next_cost = power_cost(a, b, &next, p_eff);
        let mut tries = 0;
        while next_cost > cost && tries < 30 {
            step *= cfg.irls_damping;
            next = &x + (&full - &x) * step;
            next_cost = power_cost(a, b, &next, p_eff);
            tries += 1;
        }
        if next_cost > cost {
            break;
        }
        let rel = (cost - next_cost) / cost;
        x = next;
        cost = next_cost;
        if rel <= tol {
            converged = true;
            break;
        }
    }
    Ok(IrlsResult {
        cost: power_cost(a, b, &x, p),
        x,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// `||A x - b||_p`
    pub cost: f64,
    pub sample_rows: usize,
    pub irls_converged: bool,
    pub lewis_converged: bool,
    pub theta_reduced: bool,
    pub repetitions_used: usize,
    pub matvecs_used: u64,
    pub exact: bool,
}

/// Final sample size `ceil(c_p (d+1) ln(d+1) / eps^2)`.
pub fn lp_sample_size(d: usize, eps: f64, cfg: &SolverConfig) -> usize {
    let m = (d + 1) as f64;
    (cfg.c_p * m * m.ln() / (eps * eps)).ceil().max(1.0) as usize
}

fn true_cost(a: &dyn LinearOperator, x: &[f64], b: &[f64], p: f64) -> Result<f64> {
    let ax = a.apply(x)?;
    Ok(linalg::norm_p(
        &ax.iter().zip(b).map(|(u, v)| u - v).collect::<Vec<_>>(),
        p,
    ))
}

/// `x` with `||A x - b||_p <= (1 + eps) min ||A x - b||_p` with constant
/// probability per repetition; `cfg.lp_repetitions` candidates are compared
/// by true cost.
pub fn solve_lp<R: Rng + ?Sized>(
    a: Arc<dyn LinearOperator>,
    b: &[f64],
    p: f64,
    eps: f64,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<LpSolution> {
    check_p(p)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    let (n, d) = (a.nrows(), a.ncols());
    check_len("l_p rhs", n, b.len())?;
    check_finite("l_p rhs", b)?;
    let start = a.matvec_count();
    let tol = eps / 10.0;
    if n <= d + 1 {
        let dense = oracle::materialize(a.as_ref(), cfg.materialize_cap)?;
        let sol = irls(&dense, &DVector::from_column_slice(b), p, tol, cfg)?;
        let x: Vec<f64> = sol.x.iter().copied().collect();
        let cost = true_cost(a.as_ref(), &x, b, p)?;
        return Ok(LpSolution {
            x,
            cost,
            sample_rows: n,
            irls_converged: sol.converged,
            lewis_converged: true,
            theta_reduced: false,
            repetitions_used: 1,
            matvecs_used: a.matvec_count() - start,
            exact: true,
        });
    }
    let c = AugmentedOperator::new(a.clone(), b.to_vec())?;
    let r = lp_sample_size(d, eps, cfg);
    let reps = cfg.lp_repetitions.max(1);
    let base = rng::fork(rng);
    let mut best: Option<LpSolution> = None;
    for rep in 0..reps {
        let mut local = rng::derived(base, rep as u64);
        let state = approx_lewis_form(&c, p, cfg, &mut local)?;
        let sample = sample_lewis_rows(&state.weights, r, p, &mut local)?;
        let sampled = sample.apply_to(&c)?;
        let sa = sampled.columns(0, d).into_owned();
        let sb = sampled.column(d).into_owned();
        let sol = irls(&sa, &sb, p, tol, cfg)?;
        let x: Vec<f64> = sol.x.iter().copied().collect();
        let cost = true_cost(a.as_ref(), &x, b, p)?;
        let cand = LpSolution {
            x,
            cost,
            sample_rows: r,
            irls_converged: sol.converged,
            lewis_converged: state.converged,
            theta_reduced: state.theta_reduced,
            repetitions_used: reps,
            matvecs_used: 0,
            exact: false,
        };
        if best.as_ref().is_none_or(|b| cand.cost < b.cost) {
            best = Some(cand);
        }
    }
    let mut best = best.expect("at least one repetition");
    best.matvecs_used = a.matvec_count() - start;
    Ok(best)
}
