//! Generalized leverage scores through operator products, and the repeated
//! halving row sampler.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::ops::{LinearOperator, RowSubset};

#[derive(Debug, Clone, PartialEq)]
pub struct LeverageEstimates {
    pub scores: Vec<f64>,
    /// Design target: `scores_i` within a factor `claimed_factor` of the exact value.
    pub claimed_factor: f64,
}

impl LeverageEstimates {
    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }

    pub fn all_zero(&self) -> bool {
        self.scores.iter().all(|&s| s == 0.0)
    }
}

/// Row sample `S`: row `t` of `S C` is `scale_t * c_{row_t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMatrix {
    source_rows: usize,
    samples: Vec<(usize, f64)>,
    /// Sampling distribution over the source rows; empty for identity sampling.
    probabilities: Vec<f64>,
}

impl SamplingMatrix {
    /// Every row once with unit scale.
    pub fn identity(n: usize) -> Self {
        Self {
            source_rows: n,
            samples: (0..n).map(|i| (i, 1.0)).collect(),
            probabilities: Vec::new(),
        }
    }

    pub fn from_samples(source_rows: usize, samples: Vec<(usize, f64)>) -> Self {
        Self {
            source_rows,
            samples,
            probabilities: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn source_rows(&self) -> usize {
        self.source_rows
    }

    pub fn samples(&self) -> &[(usize, f64)] {
        &self.samples
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn is_identity(&self) -> bool {
        self.probabilities.is_empty()
            && self.samples.len() == self.source_rows
            && self.samples.iter().enumerate().all(|(t, &(i, s))| t == i && s == 1.0)
    }

    pub fn row_indices(&self) -> Vec<usize> {
        self.samples.iter().map(|&(i, _)| i).collect()
    }

    /// `S v` for a length-`source_rows` vector.
    pub fn apply_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        crate::error::check_len("sampling input", self.source_rows, v.len())?;
        Ok(self.samples.iter().map(|&(i, s)| s * v[i]).collect())
    }

    /// `S C` through explicit row reads of `op`.
    pub fn apply_to(&self, op: &dyn LinearOperator) -> Result<DenseMatrix> {
        crate::error::check_len("sampling source", self.source_rows, op.nrows())?;
        let mut rows = op.rows(&self.row_indices())?;
        for (t, &(_, s)) in self.samples.iter().enumerate() {
            rows.row_mut(t).scale_mut(s);
        }
        Ok(rows)
    }

    /// `S^T S` as a dense diagonal, for small `n`.
    pub fn gram_diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.source_rows];
        for &(i, s) in &self.samples {
            d[i] += s * s;
        }
        d
    }

    fn remap(self, rows: &[usize], source_rows: usize) -> Self {
        let samples = self.samples.into_iter().map(|(i, s)| (rows[i], s)).collect();
        let mut probabilities = Vec::new();
        if !self.probabilities.is_empty() {
            probabilities = vec![0.0; source_rows];
            for (i, p) in self.probabilities.into_iter().enumerate() {
                probabilities[rows[i]] = p;
            }
        }
        Self {
            source_rows,
            samples,
            probabilities,
        }
    }
}

/// `||G B (B^T B)^+ c_i||^2 / k` for every row `c_i` of `c`, with `G` a
/// Gaussian sketch of `cfg.jl_rows(n)` rows. Touches `c` through exactly that
/// many `apply` calls.
pub fn generalized_leverage_scores<R: Rng + ?Sized>(
    c: &dyn LinearOperator,
    b: &DenseMatrix,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<LeverageEstimates> {
    let (n, m) = (c.nrows(), c.ncols());
    crate::error::check_len("leverage reference width", m, b.ncols())?;
    if b.nrows() == 0 {
        return Err(Error::EmptyInput("leverage reference matrix"));
    }
    let k = cfg.jl_rows(n);
    // B (B^T B)^+ = U S^+ V^T, so G B (B^T B)^+ = (G U) S^+ V^T
    let svd = linalg::sorted_svd(b)?;
    let tol = linalg::rank_tolerance(&svd.singular_values, b.nrows(), m, cfg.pinv_rel_tol);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol && s > 0.0).count();
    let g = linalg::gaussian_matrix(k, b.nrows(), rng);
    let gu = &g * svd.u.columns(0, rank);
    let inv_s = DMatrix::from_diagonal(&DVector::from_iterator(
        rank,
        svd.singular_values[..rank].iter().map(|s| 1.0 / s),
    ));
    let projector = gu * inv_s * svd.v_t.rows(0, rank);
    let mut scores = vec![0.0; n];
    for q in 0..k {
        let row: Vec<f64> = projector.row(q).iter().copied().collect();
        let y = c.apply(&row)?;
        for (s, v) in scores.iter_mut().zip(&y) {
            *s += v * v;
        }
    }
    for s in scores.iter_mut() {
        *s /= k as f64;
    }
    Ok(LeverageEstimates {
        scores,
        claimed_factor: 2.0,
    })
}

/// `r` i.i.d. draws with `p_j = scores_j / sum(scores)`, scaled by
/// `1/sqrt(r p_j)`. Zero-score rows are never drawn.
pub fn sample_rows<R: Rng + ?Sized>(scores: &[f64], r: usize, rng: &mut R) -> Result<SamplingMatrix> {
    if r == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    crate::error::check_finite("leverage scores", scores)?;
    if scores.iter().any(|&s| s < 0.0) {
        return Err(Error::InvalidParameter("negative sampling score".into()));
    }
    let total: f64 = scores.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroScores);
    }
    let dist = WeightedIndex::new(scores).map_err(|_| Error::ZeroScores)?;
    let probabilities: Vec<f64> = scores.iter().map(|s| s / total).collect();
    let samples = (0..r)
        .map(|_| {
            let j = dist.sample(rng);
            (j, 1.0 / (r as f64 * probabilities[j]).sqrt())
        })
        .collect();
    Ok(SamplingMatrix {
        source_rows: scores.len(),
        samples,
        probabilities,
    })
}

/// Row count at or below which repeated halving stops recursing.
pub fn halving_threshold(m: usize, eps: f64, cfg: &SolverConfig) -> usize {
    let mf = m.max(2) as f64;
    let t = (cfg.c_b * mf * mf.ln() / (eps * eps)).ceil() as usize;
    t.max(4 * m)
}

/// Spectral approximation `S C` with `r` sampled rows.
///
/// Halving is index bookkeeping on the parent operator; rows are read only for
/// the base case and for the final sample.
pub fn repeated_halving<R: Rng + ?Sized>(
    c: &dyn LinearOperator,
    r: usize,
    eps: f64,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<(SamplingMatrix, DenseMatrix)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    if c.nrows() == 0 {
        return Err(Error::EmptyInput("operator rows"));
    }
    let threshold = halving_threshold(c.ncols(), eps, cfg).max(r);
    let all: Vec<usize> = (0..c.nrows()).collect();
    let s = halve(c, all, r, threshold, cfg, rng)?;
    let sampled = s.apply_to(c)?;
    Ok((s, sampled))
}

fn halve<R: Rng + ?Sized>(
    root: &dyn LinearOperator,
    rows: Vec<usize>,
    r: usize,
    threshold: usize,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<SamplingMatrix> {
    let n = rows.len();
    if n <= threshold {
        return Ok(SamplingMatrix::identity(n).remap(&rows, root.nrows()));
    }
    let mut half: Vec<usize> = index::sample(rng, n, n.div_ceil(2))
        .into_iter()
        .map(|t| rows[t])
        .collect();
    half.sort_unstable();
    let inner = halve(root, half, r, threshold, cfg, rng)?;
    let reference = inner.apply_to(root)?;
    let sub = RowSubset::new(root, rows)?;
    let scores = generalized_leverage_scores(&sub, &reference, cfg, rng)?;
    let local = sample_rows(&scores.scores, r, rng)?;
    Ok(local.remap(sub.indices(), root.nrows()))
}
