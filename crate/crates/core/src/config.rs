//! Tunable constants shared by the randomized solvers.
//!
//! Every constant hidden inside an `O(·)` of the sampling bounds lives here so
//! that runs are reproducible from a single `key=value` file.

use crate::error::{Error, Result};

/// Calibration constants for the samplers and inner solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// JL row multiplier: Gaussian sketches get `c_g * ceil(log2 n)` rows.
    pub c_g: f64,
    /// Repeated-halving base case: recurse while rows exceed
    /// `max(c_b * m ln m / eps^2, 4m)`.
    pub c_b: f64,
    /// Least-squares sample size multiplier: `c_s (d+1)(ln(d+1)+1)/eps^2`.
    pub c_s: f64,
    /// Low-rank column sample multiplier: `c_k (k ln k + k/eps^2)`.
    pub c_k: f64,
    /// Oversampling constant for the Lewis-form row sampler.
    pub c_theta: f64,
    /// Final l_p row sample multiplier: `c_p (d+1) ln(d+1)/eps^2`.
    pub c_p: f64,
    /// Degree-2 kernel sample multiplier: `c_q (d ln d + d/eps)`.
    pub c_q: f64,
    /// TensorSketch rows for the change of basis: `max(c_r d^2, m_r_min)`.
    pub c_r: f64,
    pub m_r_min: usize,
    /// TensorSketch rows per repetition for block-norm estimation.
    pub m_base: usize,
    /// Median repetitions: `median_factor * ceil(log2 n)`, made odd.
    pub median_factor: usize,
    /// Minimum rows of the Gaussian column sketch inside a block.
    pub h_rows_min: usize,
    /// Singular values below `sigma_max * max(dims) * pinv_rel_tol` are dropped.
    pub pinv_rel_tol: f64,
    pub irls_weight_clamp: f64,
    pub irls_damping: f64,
    pub irls_max_iter: usize,
    pub lewis_tol: f64,
    pub lewis_max_iter: usize,
    /// Boosting repetitions for the l_p solver.
    pub lp_repetitions: usize,
    /// Allow `d >= n` in the autoregressive design operator.
    pub allow_underdetermined: bool,
    /// Replace the difference factor by the identity in the dynamical solver.
    pub dynamical_identity_u: bool,
    /// Entry cap for dense materialization.
    pub materialize_cap: usize,
    /// Operator-application budget: `matvec_budget * ceil(log2 n)^2` per solve.
    pub matvec_budget: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            c_g: 8.0,
            c_b: 4.0,
            c_s: 4.0,
            c_k: 1.0,
            c_theta: 4.0,
            c_p: 4.0,
            c_q: 8.0,
            c_r: 4.0,
            m_r_min: 128,
            m_base: 64,
            median_factor: 6,
            h_rows_min: 64,
            pinv_rel_tol: 1e-14,
            irls_weight_clamp: 1e-10,
            irls_damping: 0.5,
            irls_max_iter: 200,
            lewis_tol: 1e-4,
            lewis_max_iter: 1000,
            lp_repetitions: 1,
            allow_underdetermined: false,
            dynamical_identity_u: false,
            materialize_cap: 10_000_000,
            matvec_budget: 16.0,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse value {value:?} for key {key}")))
}

impl SolverConfig {
    /// Overrides one constant by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "c_g" => self.c_g = parse(key, value)?,
            "c_b" => self.c_b = parse(key, value)?,
            "c_s" => self.c_s = parse(key, value)?,
            "c_k" => self.c_k = parse(key, value)?,
            "c_theta" => self.c_theta = parse(key, value)?,
            "c_p" => self.c_p = parse(key, value)?,
            "c_q" => self.c_q = parse(key, value)?,
            "c_r" => self.c_r = parse(key, value)?,
            "m_r_min" => self.m_r_min = parse(key, value)?,
            "m_base" => self.m_base = parse(key, value)?,
            "median_factor" => self.median_factor = parse(key, value)?,
            "h_rows_min" => self.h_rows_min = parse(key, value)?,
            "pinv_rel_tol" => self.pinv_rel_tol = parse(key, value)?,
            "irls_weight_clamp" => self.irls_weight_clamp = parse(key, value)?,
            "irls_damping" => self.irls_damping = parse(key, value)?,
            "irls_max_iter" => self.irls_max_iter = parse(key, value)?,
            "lewis_tol" => self.lewis_tol = parse(key, value)?,
            "lewis_max_iter" => self.lewis_max_iter = parse(key, value)?,
            "lp_repetitions" => self.lp_repetitions = parse(key, value)?,
            "allow_underdetermined" => self.allow_underdetermined = parse(key, value)?,
            "dynamical_identity_u" => self.dynamical_identity_u = parse(key, value)?,
            "materialize_cap" => self.materialize_cap = parse(key, value)?,
            "matvec_budget" => self.matvec_budget = parse(key, value)?,
            other => return Err(Error::InvalidParameter(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Rows of a JL sketch covering `n` vectors.
    pub fn jl_rows(&self, n: usize) -> usize {
        ((self.c_g * ceil_log2(n) as f64).ceil() as usize).max(1)
    }

    /// Odd repetition count for median amplification over `n` events.
    pub fn median_reps(&self, n: usize) -> usize {
        let r = (self.median_factor * ceil_log2(n).max(1)).max(1);
        if r % 2 == 0 {
            r + 1
        } else {
            r
        }
    }

    /// Upper bound on operator applications for one solve on `n` rows.
    pub fn matvec_bound(&self, n: usize) -> u64 {
        let l = ceil_log2(n).max(1) as f64;
        (self.matvec_budget * l * l).floor() as u64
    }
}

/// `ceil(log2 n)`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}
