//! Row sampling for the degree-2 polynomial kernel.
//!
//! Rows of `phi(A)` are indexed by `(i, a, c)`: block `i`, pair `(a, c)`,
//! with entry `x[a] x[c]` in column `l` for `x` the block's `l`-th point.
//! For a vector `v`, the block `B^i v` reshaped to `p x p` is
//! `M = C^i diag(v) C^i^T`, so everything below works on `p x d` blocks and
//! never forms `phi(A)`.
//!
//! A draw picks a JL column `j` with probability `gamma_j / sum gamma`, a
//! block with probability proportional to its estimated squared norm under
//! `v_j`, a column of `M` by sketched column norms and finally an entry of
//! that column by exact squared value. The exact marginal of every draw is
//! recomputed from the same pieces.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};

use super::problem::{encode_row, KernelARProblem};
use crate::config::{ceil_log2, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::sketch::{median_norm_estimate, CountSketchSpec, TensorSketchSpec};

const BLOCK_CHUNK: usize = 64;
const MAX_DRAW_ATTEMPTS: usize = 1000;

fn require_poly2(problem: &KernelARProblem) -> Result<()> {
    if problem.kernel().is_homogeneous_quadratic() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(
            "row sampling needs the degree-2 polynomial kernel".into(),
        ))
    }
}

/// `C^i` as a dense `p x d` matrix.
pub fn block_matrix(problem: &KernelARProblem, i: usize) -> DenseMatrix {
    let (p, d) = (problem.p(), problem.d());
    DMatrix::from_fn(p, d, |a, l| problem.block_point(i, l)[a])
}

#[derive(Debug, Clone)]
pub struct ChangeOfBasis {
    /// `d x d`; `phi(A) R` has roughly orthonormal columns.
    pub r: DenseMatrix,
    pub rank_deficient: bool,
    pub sketch_rows: usize,
}

/// `R = V Sigma^+` from the SVD `W = U Sigma V^T`, where `W` is a
/// degree-3 tensor sketch of `phi(A)`: row `(i, a, c)` goes to bucket `h0(i) + h1(a) + h2(c) mod m`
/// with sign `s0(i) s1(a) s2(c)`. Column `l` of `W` is then a sum over
/// blocks of signed, cyclically shifted TensorSketch images of points.
pub fn change_of_basis<R: Rng + ?Sized>(
    problem: &KernelARProblem,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<ChangeOfBasis> {
    let (n, d, p) = (problem.n(), problem.d(), problem.p());
    let m = ((cfg.c_r * (d * d) as f64).ceil() as usize).max(cfg.m_r_min).max(d);
    let ts = TensorSketchSpec::new(p, m, rng.random())?;
    let h0 = CountSketchSpec::new(n, m, rng.random())?;
    let series = problem.series();
    let images: Vec<Vec<f64>> = (0..n + d - 1)
        .into_par_iter()
        .map(|t| ts.apply(series.point(t)))
        .collect::<Result<_>>()?;
    let mut w = DMatrix::zeros(m, d);
    for i in 0..n {
        let (shift, sign) = (h0.bucket(i), h0.sign(i));
        for l in 0..d {
            let img = &images[i + d - 1 - l];
            let mut col = w.column_mut(l);
            for (q, &y) in img.iter().enumerate() {
                col[(q + shift) % m] += sign * y;
            }
        }
    }
    let svd = linalg::sorted_svd(&w)?;
    let sigma = &svd.singular_values;
    if sigma[0] == 0.0 {
        return Err(Error::ZeroScores);
    }
    // directions below the cut-off get a zero column rather than a huge one
    let cut = sigma[0] * d as f64 * cfg.pinv_rel_tol.max(1e-12);
    let rank_deficient = sigma.iter().any(|&s| s <= cut);
    let r = DMatrix::from_fn(d, d, |l, c| {
        if sigma[c] > cut {
            svd.v_t[(c, l)] / sigma[c]
        } else {
            0.0
        }
    });
    Ok(ChangeOfBasis {
        r,
        rank_deficient,
        sketch_rows: m,
    })
}

/// Block norm estimates for each column of `v` (`d x k`): entry `[j][i]` is
/// the median over `sketches` of `||sum_l v_lj TS(x_{i+d-1-l})||^2`, which
/// estimates `||B^i v_j||^2`. Also returns the TensorSketch applications.
pub fn estimate_block_norms(
    problem: &KernelARProblem,
    v: &DenseMatrix,
    sketches: &[TensorSketchSpec],
) -> Result<(Vec<Vec<f64>>, u64)> {
    let (n, d) = (problem.n(), problem.d());
    if v.nrows() != d {
        return Err(Error::DimensionMismatch {
            context: "block norm directions",
            expected: d,
            actual: v.nrows(),
        });
    }
    if sketches.is_empty() {
        return Err(Error::InvalidParameter("need at least one sketch".into()));
    }
    let k = v.ncols();
    let series = problem.series();
    let chunks: Vec<(Vec<Vec<f64>>, u64)> = (0..n.div_ceil(BLOCK_CHUNK))
        .into_par_iter()
        .map(|ci| {
            let lo = ci * BLOCK_CHUNK;
            let hi = (lo + BLOCK_CHUNK).min(n);
            let width = hi - lo;
            // est[block][j][rep]
            let mut est = vec![vec![vec![0.0; sketches.len()]; k]; width];
            let mut applies = 0u64;
            for (rep, ts) in sketches.iter().enumerate() {
                let images: Vec<Vec<f64>> = (lo..hi + d - 1)
                    .map(|t| ts.apply(series.point(t)))
                    .collect::<Result<_>>()?;
                applies += images.len() as u64;
                let mut z = vec![0.0; ts.rows()];
                for (bi, block_est) in est.iter_mut().enumerate() {
                    for (j, e) in block_est.iter_mut().enumerate() {
                        z.iter_mut().for_each(|x| *x = 0.0);
                        for l in 0..d {
                            let coef = v[(l, j)];
                            if coef != 0.0 {
                                for (zq, &y) in z.iter_mut().zip(&images[bi + d - 1 - l]) {
                                    *zq += coef * y;
                                }
                            }
                        }
                        e[rep] = linalg::dot(&z, &z);
                    }
                }
            }
            let medians = est
                .iter()
                .map(|block_est| block_est.iter().map(|e| median_norm_estimate(e)).collect::<Result<Vec<f64>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok((medians, applies))
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::with_capacity(n); k];
    let mut applies = 0;
    for (medians, a) in chunks {
        applies += a;
        for block in medians {
            for (j, m) in block.into_iter().enumerate() {
                out[j].push(m);
            }
        }
    }
    Ok((out, applies))
}

/// Draws a pair `(a, c)` of the block matrix `M = C diag(v) C^T`: column `c`
/// with probability proportional to `||H M e_c||^2` (with `hc = H C`), then
/// row `a` proportional to `M[a][c]^2`. `None` if the sketched block is zero.
pub fn sample_block_entry<R: Rng + ?Sized>(
    c: &DenseMatrix,
    hc: &DenseMatrix,
    v: &[f64],
    rng: &mut R,
) -> Option<(usize, usize)> {
    let mut k = hc.clone();
    for (l, &vl) in v.iter().enumerate() {
        k.column_mut(l).scale_mut(vl);
    }
    let sketched = k * c.transpose();
    let col_weights: Vec<f64> = sketched.column_iter().map(|col| col.norm_squared()).collect();
    let col = WeightedIndex::new(&col_weights).ok()?.sample(rng);
    let u = DVector::from_iterator(v.len(), v.iter().enumerate().map(|(l, &vl)| vl * c[(col, l)]));
    let m_col = c * u;
    let row_weights: Vec<f64> = m_col.iter().map(|x| x * x).collect();
    let a = WeightedIndex::new(&row_weights).ok()?.sample(rng);
    Some((a, col))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly2Sample {
    /// Encoded row `i p^2 + a p + c` of `phi(A)`.
    pub row: usize,
    pub block: usize,
    pub a: usize,
    pub c: usize,
    /// Marginal probability of drawing `row`.
    pub probability: f64,
}

/// Per-block quantities the marginal probability needs.
struct BlockForms {
    c: DenseMatrix,
    hc: DenseMatrix,
    /// `C^T C`
    ctc: DenseMatrix,
    /// `(H C)^T (H C)`
    hh: DenseMatrix,
}

fn quad(m: &DenseMatrix, x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (r, &xr) in x.iter().enumerate() {
        for (c, &yc) in y.iter().enumerate() {
            s += xr * m[(r, c)] * yc;
        }
    }
    s
}

pub struct Poly2Sampler<'a> {
    problem: &'a KernelARProblem,
    basis: ChangeOfBasis,
    v: DenseMatrix,
    block_norms: Vec<Vec<f64>>,
    partial_sums: Vec<Vec<f64>>,
    gammas: Vec<f64>,
    gamma_total: f64,
    column_dist: WeightedIndex<f64>,
    h: DenseMatrix,
    hx: DenseMatrix,
    tensor_sketch_applies: u64,
    degenerate_draws: AtomicU64,
}

impl std::fmt::Debug for Poly2Sampler<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Poly2Sampler")
            .field("problem", self.problem)
            .field("jl_columns", &self.v.ncols())
            .field("h_rows", &self.h.nrows())
            .finish()
    }
}

/// Preprocesses `problem` for row draws.
pub fn build_poly2_sampler<'a, R: Rng + ?Sized>(
    problem: &'a KernelARProblem,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<Poly2Sampler<'a>> {
    require_poly2(problem)?;
    let (n, d, p) = (problem.n(), problem.d(), problem.p());
    let basis = change_of_basis(problem, cfg, rng)?;
    let k = cfg.jl_rows(n * p * p);
    let g = linalg::gaussian_matrix(d, k, rng);
    let v = &basis.r * g;
    let sketches = (0..cfg.median_reps(n))
        .map(|_| TensorSketchSpec::new(p, cfg.m_base, rng.random()))
        .collect::<Result<Vec<_>>>()?;
    let (block_norms, tensor_sketch_applies) = estimate_block_norms(problem, &v, &sketches)?;
    let partial_sums: Vec<Vec<f64>> = block_norms
        .iter()
        .map(|ell| {
            ell.iter()
                .scan(0.0, |acc, &x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let gammas: Vec<f64> = partial_sums.iter().map(|s| s.last().copied().unwrap_or(0.0)).collect();
    let gamma_total: f64 = gammas.iter().sum();
    let column_dist = WeightedIndex::new(&gammas).map_err(|_| Error::ZeroScores)?;
    let h_rows = cfg.h_rows_min.max(8 * ceil_log2(n));
    let h = linalg::gaussian_matrix(h_rows, p, rng);
    let points = DMatrix::from_fn(p, n + d - 1, |a, t| problem.series().point(t)[a]);
    let hx = &h * points;
    Ok(Poly2Sampler {
        problem,
        basis,
        v,
        block_norms,
        partial_sums,
        gammas,
        gamma_total,
        column_dist,
        h,
        hx,
        tensor_sketch_applies,
        degenerate_draws: AtomicU64::new(0),
    })
}

impl Poly2Sampler<'_> {
    pub fn change_of_basis(&self) -> &ChangeOfBasis {
        &self.basis
    }

    /// `V = R G`, `d x k`.
    pub fn directions(&self) -> &DenseMatrix {
        &self.v
    }

    /// `[j][i]` estimates of `||B^i v_j||^2`.
    pub fn block_norms(&self) -> &[Vec<f64>] {
        &self.block_norms
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn h_rows(&self) -> usize {
        self.h.nrows()
    }

    pub fn tensor_sketch_applies(&self) -> u64 {
        self.tensor_sketch_applies
    }

    /// Draws that hit a zero sketched block and were redrawn.
    pub fn degenerate_draws(&self) -> u64 {
        self.degenerate_draws.load(Ordering::Relaxed)
    }

    fn forms(&self, i: usize) -> BlockForms {
        let d = self.problem.d();
        let c = block_matrix(self.problem, i);
        let hc = DMatrix::from_fn(self.hx.nrows(), d, |r, l| self.hx[(r, i + d - 1 - l)]);
        let ctc = c.tr_mul(&c);
        let hh = hc.tr_mul(&hc);
        BlockForms { c, hc, ctc, hh }
    }

    fn pick_block<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> usize {
        let sums = &self.partial_sums[j];
        let target = rng.random::<f64>() * self.gammas[j];
        let mut i = sums.partition_point(|&s| s <= target).min(sums.len() - 1);
        while self.block_norms[j][i] == 0.0 && i > 0 {
            i -= 1;
        }
        i
    }

    /// One row draw together with its marginal probability.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Poly2Sample> {
        for _ in 0..MAX_DRAW_ATTEMPTS {
            let j = self.column_dist.sample(rng);
            let i = self.pick_block(j, rng);
            let forms = self.forms(i);
            let v: Vec<f64> = self.v.column(j).iter().copied().collect();
            match sample_block_entry(&forms.c, &forms.hc, &v, rng) {
                Some((a, c)) => {
                    let p = self.problem.p();
                    return Ok(Poly2Sample {
                        row: encode_row(p, i, a, c),
                        block: i,
                        a,
                        c,
                        probability: self.probability_with(&forms, i, a, c),
                    });
                }
                None => {
                    self.degenerate_draws.fetch_add(1, Ordering::Relaxed);
                }
            }
        }
        Err(Error::Numerical("row sampler kept drawing zero blocks".into()))
    }

    /// Probability that [`Self::sample`] returns row `(i, a, c)`.
    pub fn row_probability(&self, i: usize, a: usize, c: usize) -> f64 {
        self.probability_with(&self.forms(i), i, a, c)
    }

    fn probability_with(&self, forms: &BlockForms, i: usize, a: usize, c: usize) -> f64 {
        let d = self.problem.d();
        let mut total = 0.0;
        for j in 0..self.v.ncols() {
            let ell = self.block_norms[j][i];
            if ell == 0.0 {
                continue;
            }
            let v: Vec<f64> = self.v.column(j).iter().copied().collect();
            // ||H M||_F^2 = sum_{l,l'} v_l v_l' (C^T C)[l,l'] (HC^T HC)[l,l']
            let mut frob = 0.0;
            for l in 0..d {
                for m in 0..d {
                    frob += v[l] * v[m] * forms.ctc[(l, m)] * forms.hh[(l, m)];
                }
            }
            if frob <= 0.0 {
                continue;
            }
            let u: Vec<f64> = (0..d).map(|l| v[l] * forms.c[(c, l)]).collect();
            let col_sq = quad(&forms.hh, &u, &u);
            let m_col_sq = quad(&forms.ctc, &u, &u);
            if m_col_sq <= 0.0 {
                continue;
            }
            let entry: f64 = (0..d).map(|l| forms.c[(a, l)] * u[l]).sum();
            total += ell / self.gamma_total * (col_sq / frob) * (entry * entry / m_col_sq);
        }
        total
    }
}

/// `ceil(c_q (d ln d + d / eps))`, at least `d`.
pub fn poly2_sample_size(d: usize, eps: f64, cfg: &SolverConfig) -> usize {
    let df = d as f64;
    ((cfg.c_q * (df * df.ln() + df / eps)).ceil() as usize).max(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poly2Solution {
    pub x: Vec<f64>,
    pub samples: usize,
    pub sampled_rows: Vec<usize>,
    /// Target entries read during the solve.
    pub target_reads: u64,
    pub rank_deficient: bool,
    pub basis_rank_deficient: bool,
    pub degenerate_draws: u64,
    pub tensor_sketch_applies: u64,
    pub jl_columns: usize,
}

/// Approximate `argmin_x ||phi(A) x - b||_2` from
/// `s = c_q (d ln d + d / eps)` sampled rows; only sampled target entries
/// are read.
pub fn solve_poly2<R: Rng + ?Sized>(
    problem: &KernelARProblem,
    eps: f64,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<Poly2Solution> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    let sampler = build_poly2_sampler(problem, cfg, rng)?;
    let d = problem.d();
    let s = poly2_sample_size(d, eps, cfg);
    let reads_before = problem.target_reads();
    let mut sa = DMatrix::zeros(s, d);
    let mut sb = DVector::zeros(s);
    let mut sampled_rows = Vec::with_capacity(s);
    for r in 0..s {
        let draw = sampler.sample(rng)?;
        let scale = 1.0 / (s as f64 * draw.probability).sqrt();
        for l in 0..d {
            let x = problem.block_point(draw.block, l);
            sa[(r, l)] = scale * x[draw.a] * x[draw.c];
        }
        sb[r] = scale * problem.read_target(draw.block, draw.a, draw.c);
        sampled_rows.push(draw.row);
    }
    let sol = linalg::lstsq(&sa, &sb, cfg.pinv_rel_tol)?;
    Ok(Poly2Solution {
        x: sol.x.iter().copied().collect(),
        samples: s,
        sampled_rows,
        target_reads: problem.target_reads() - reads_before,
        rank_deficient: sol.rank_deficient,
        basis_rank_deficient: sampler.basis.rank_deficient,
        degenerate_draws: sampler.degenerate_draws(),
        tensor_sketch_applies: sampler.tensor_sketch_applies,
        jl_columns: sampler.v.ncols(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel_ar::{Kernel, PointSeries, TargetAccess};
    use crate::oracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn random_series(rng: &mut ChaCha8Rng, points: usize, p: usize) -> PointSeries {
        let data = (0..points * p).map(|_| rng.random_range(-1.0..1.0)).collect();
        PointSeries::new(p, data).unwrap()
    }

    fn explicit_problem(seed: u64, n: usize, p: usize, d: usize) -> KernelARProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let series = random_series(&mut rng, n + d - 1, p);
        let target: Arc<dyn TargetAccess> =
            Arc::new((0..n * p * p).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>());
        KernelARProblem::with_target(series, d, Kernel::quadratic(), target).unwrap()
    }

    fn exact_row_distribution(problem: &KernelARProblem, r: &DenseMatrix) -> Vec<f64> {
        let (phi, _) = oracle::exact_poly2_lift(problem).unwrap();
        let pr = phi * r;
        let w: Vec<f64> = pr.row_iter().map(|row| row.norm_squared()).collect();
        let total: f64 = w.iter().sum();
        w.iter().map(|x| x / total).collect()
    }

    #[test]
    fn rejects_other_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = random_series(&mut rng, 10, 2);
        let prob = KernelARProblem::autoregressive(s, 2, Kernel::Linear).unwrap();
        assert!(build_poly2_sampler(&prob, &SolverConfig::default(), &mut rng).is_err());
    }

    #[test]
    fn marginals_sum_to_one_and_match_draws() {
        let prob = explicit_problem(1, 8, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sampler = build_poly2_sampler(&prob, &SolverConfig::default(), &mut rng).unwrap();
        let p = 3;
        let mut probs = vec![0.0; 8 * p * p];
        for i in 0..8 {
            for a in 0..p {
                for c in 0..p {
                    probs[encode_row(p, i, a, c)] = sampler.row_probability(i, a, c);
                }
            }
        }
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let draws = 40_000;
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..draws {
            let s = sampler.sample(&mut rng).unwrap();
            assert!((s.probability - probs[s.row]).abs() < 1e-9 * (1.0 + probs[s.row]));
            counts[s.row] += 1;
        }
        let tv: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(&k, &q)| (k as f64 / draws as f64 - q).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.03, "tv {tv}");
    }

    #[test]
    fn sampler_tracks_exact_row_norms() {
        let prob = explicit_problem(3, 16, 3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sampler = build_poly2_sampler(&prob, &SolverConfig::default(), &mut rng).unwrap();
        let exact = exact_row_distribution(&prob, &sampler.change_of_basis().r);
        let p = 3;
        let mut tv = 0.0;
        for (row, &q) in exact.iter().enumerate() {
            let (i, a, c) = crate::kernel_ar::decode_row(p, row);
            tv += (sampler.row_probability(i, a, c) - q).abs();
        }
        assert!(tv / 2.0 < 0.15, "tv {}", tv / 2.0);
    }

    #[test]
    fn basis_roughly_orthonormalizes() {
        let prob = explicit_problem(5, 40, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let basis = change_of_basis(&prob, &SolverConfig::default(), &mut rng).unwrap();
        let (phi, _) = oracle::exact_poly2_lift(&prob).unwrap();
        let svd = linalg::sorted_svd(&(phi * &basis.r)).unwrap();
        let (hi, lo) = (svd.singular_values[0], svd.singular_values[3]);
        assert!(hi / lo < 4.0, "condition {}", hi / lo);
        assert!(!basis.rank_deficient);
    }

    #[test]
    fn rank_one_lift_keeps_a_bounded_basis() {
        // one block, one coordinate: phi(A) is a single row
        let prob = explicit_problem(3, 1, 1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(205162);
        let basis = change_of_basis(&prob, &SolverConfig::default(), &mut rng).unwrap();
        assert!(basis.rank_deficient);
        let (phi, _) = oracle::exact_poly2_lift(&prob).unwrap();
        let pr = phi * &basis.r;
        assert!((pr.norm() - 1.0).abs() < 0.5, "norm {}", pr.norm());
        let sampler = build_poly2_sampler(&prob, &SolverConfig::default(), &mut rng).unwrap();
        assert!((sampler.row_probability(0, 0, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_direction_gives_zero_norms() {
        let prob = explicit_problem(7, 10, 2, 3);
        let sketches: Vec<_> = (0..5).map(|s| TensorSketchSpec::new(2, 16, s).unwrap()).collect();
        let v = DMatrix::zeros(3, 1);
        let (ell, applies) = estimate_block_norms(&prob, &v, &sketches).unwrap();
        assert!(ell[0].iter().all(|&x| x == 0.0));
        assert_eq!(applies, 5 * 12);
    }

    #[test]
    fn block_norm_estimates_within_tolerance() {
        let prob = explicit_problem(8, 64, 4, 3);
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sketches: Vec<_> = (0..cfg.median_reps(64))
            .map(|_| TensorSketchSpec::new(4, cfg.m_base, rng.random()).unwrap())
            .collect();
        let v = linalg::gaussian_matrix(3, 4, &mut rng);
        let (ell, _) = estimate_block_norms(&prob, &v, &sketches).unwrap();
        let (phi, _) = oracle::exact_poly2_lift(&prob).unwrap();
        let mut good = 0;
        for j in 0..4 {
            let bv = &phi * v.column(j);
            for i in 0..64 {
                let exact = bv.rows(i * 16, 16).norm_squared();
                if (ell[j][i] - exact).abs() <= 0.2 * exact {
                    good += 1;
                }
            }
        }
        assert!(good as f64 >= 0.95 * 256.0, "{good}");
    }

    #[test]
    fn single_column_block_samples_its_support() {
        // C has one nonzero column l0 = 1 whose point has support {0, 2}
        let c = DMatrix::from_row_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, -2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let h = linalg::gaussian_matrix(64, 3, &mut rng);
        let hc = &h * &c;
        for _ in 0..500 {
            let (a, cc) = sample_block_entry(&c, &hc, &[0.0, 1.0], &mut rng).unwrap();
            assert!(a != 1 && cc != 1);
        }
        assert!(sample_block_entry(&c, &hc, &[1.0, 0.0], &mut rng).is_none());
    }

    #[test]
    fn single_block_gammas() {
        let prob = explicit_problem(11, 1, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let sampler = build_poly2_sampler(&prob, &SolverConfig::default(), &mut rng).unwrap();
        let (phi, _) = oracle::exact_poly2_lift(&prob).unwrap();
        for (j, &g) in sampler.gammas().iter().enumerate() {
            let exact = (&phi * sampler.directions().column(j)).norm_squared();
            assert!((g - exact).abs() <= 0.2 * exact, "{g} vs {exact}");
        }
    }

    #[test]
    fn noiseless_target_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (n, p, d) = (30, 3, 3);
        let series = random_series(&mut rng, n + d - 1, p);
        let prob0 = KernelARProblem::with_target(
            series.clone(),
            d,
            Kernel::quadratic(),
            Arc::new(vec![0.0; n * p * p]),
        )
        .unwrap();
        let (phi, _) = oracle::exact_poly2_lift(&prob0).unwrap();
        let truth = DVector::from_vec(vec![0.4, -1.0, 2.5]);
        let b: Vec<f64> = (&phi * &truth).iter().copied().collect();
        let prob = KernelARProblem::with_target(series, d, Kernel::quadratic(), Arc::new(b)).unwrap();
        let sol = solve_poly2(&prob, 0.5, &SolverConfig::default(), &mut rng).unwrap();
        for (x, t) in sol.x.iter().zip(truth.iter()) {
            assert!((x - t).abs() < 1e-8);
        }
        assert_eq!(sol.target_reads, sol.samples as u64);
    }

    #[test]
    fn solve_is_near_optimal_and_reads_few_targets() {
        let prob = explicit_problem(14, 64, 4, 3);
        let (phi, b) = oracle::exact_poly2_lift(&prob).unwrap();
        let opt = oracle::exact_l2(&phi, &b).unwrap().residual;
        let mut good = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let sol = solve_poly2(&prob, 0.5, &SolverConfig::default(), &mut rng).unwrap();
            let res = (&phi * DVector::from_vec(sol.x.clone()) - &b).norm();
            if res <= 1.5 * opt {
                good += 1;
            }
            assert!(sol.target_reads <= sol.samples as u64);
            assert!(sol.samples < 64 * 16);
        }
        assert!(good >= 8, "{good}");
    }

    #[test]
    fn deterministic_given_seed() {
        let prob = explicit_problem(15, 20, 2, 2);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            solve_poly2(&prob, 0.5, &SolverConfig::default(), &mut rng).unwrap()
        };
        let (a, b) = (run(3), run(3));
        assert_eq!(a.sampled_rows, b.sampled_rows);
        assert_eq!(
            a.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
