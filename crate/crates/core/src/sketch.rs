//! CountSketch, degree-2 TensorSketch and Gaussian sketches.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::linalg;

/// Sparse sign/hash projection `R^n -> R^m`: one `+-1` per column.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSketchSpec {
    m: usize,
    buckets: Vec<usize>,
    signs: Vec<f64>,
    seed: u64,
}

impl CountSketchSpec {
    /// Fully random hashes drawn from `seed`.
    pub fn new(n: usize, m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("sketch rows must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let buckets = (0..n).map(|_| rng.random_range(0..m)).collect();
        let signs = (0..n)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Ok(Self {
            m,
            buckets,
            signs,
            seed,
        })
    }

    /// Explicit hash and sign tables.
    pub fn from_tables(m: usize, buckets: Vec<usize>, signs: Vec<f64>) -> Result<Self> {
        check_len("count sketch signs", buckets.len(), signs.len())?;
        if let Some(&b) = buckets.iter().find(|&&b| b >= m) {
            return Err(Error::IndexOutOfRange { index: b, len: m });
        }
        if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::InvalidParameter("count sketch signs must be +-1".into()));
        }
        Ok(Self {
            m,
            buckets,
            signs,
            seed: 0,
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn domain(&self) -> usize {
        self.buckets.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bucket(&self, i: usize) -> usize {
        self.buckets[i]
    }

    pub fn sign(&self, i: usize) -> f64 {
        self.signs[i]
    }

    /// `out[k] = sum_{h(i) = k} s(i) x_i`; zeros are skipped.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("count sketch input", self.domain(), x.len())?;
        let mut out = vec![0.0; self.m];
        for (i, &v) in x.iter().enumerate() {
            if v != 0.0 {
                out[self.buckets[i]] += self.signs[i] * v;
            }
        }
        Ok(out)
    }

    /// Dense `m x n` sign matrix.
    pub fn materialize(&self) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.m, self.domain());
        for i in 0..self.domain() {
            s[(self.buckets[i], i)] = self.signs[i];
        }
        s
    }
}

/// Degree-2 TensorSketch: a CountSketch of `u (x) u` evaluated as the cyclic
/// convolution of two CountSketch images of `u`.
#[derive(Clone)]
pub struct TensorSketchSpec {
    m: usize,
    first: CountSketchSpec,
    second: CountSketchSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TensorSketchSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TensorSketchSpec")
            .field("m", &self.m)
            .field("p", &self.first.domain())
            .finish()
    }
}

impl TensorSketchSpec {
    pub fn new(p: usize, m: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = CountSketchSpec::new(p, m, rng.random())?;
        let second = CountSketchSpec::new(p, m, rng.random())?;
        Self::from_sketches(first, second)
    }

    pub fn from_sketches(first: CountSketchSpec, second: CountSketchSpec) -> Result<Self> {
        check_len("tensor sketch rows", first.rows(), second.rows())?;
        check_len("tensor sketch domain", first.domain(), second.domain())?;
        let m = first.rows();
        let mut planner = FftPlanner::new();
        Ok(Self {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            first,
            second,
        })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.first.domain()
    }

    /// Bucket of coordinate `(a, c)` of `u (x) u`.
    pub fn pair_bucket(&self, a: usize, c: usize) -> usize {
        (self.first.bucket(a) + self.second.bucket(c)) % self.m
    }

    pub fn pair_sign(&self, a: usize, c: usize) -> f64 {
        self.first.sign(a) * self.second.sign(c)
    }

    fn spectrum(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        let a = self.first.apply(u)?;
        let b = self.second.apply(u)?;
        let mut fa = self.spectrum(&a);
        let fb = self.spectrum(&b);
        for (x, y) in fa.iter_mut().zip(&fb) {
            *x *= y;
        }
        self.inverse.process(&mut fa);
        let scale = 1.0 / self.m as f64;
        Ok(fa.iter().map(|c| c.re * scale).collect())
    }

    /// Dense `m x p^2` matrix acting on `u (x) u` with row-major pair order.
    pub fn materialize(&self) -> DMatrix<f64> {
        let p = self.dim();
        let mut s = DMatrix::zeros(self.m, p * p);
        for a in 0..p {
            for c in 0..p {
                s[(self.pair_bucket(a, c), a * p + c)] += self.pair_sign(a, c);
            }
        }
        s
    }
}

/// Dense i.i.d. standard normal `m x n` sketch.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSketchSpec {
    matrix: DMatrix<f64>,
    seed: u64,
}

impl GaussianSketchSpec {
    pub fn new(m: usize, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            matrix: linalg::gaussian_matrix(m, n, &mut rng),
            seed,
        }
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("gaussian sketch input", self.cols(), x.len())?;
        let mut out = vec![0.0; self.rows()];
        for (j, &v) in x.iter().enumerate() {
            if v != 0.0 {
                for (o, g) in out.iter_mut().zip(self.matrix.column(j).iter()) {
                    *o += g * v;
                }
            }
        }
        Ok(out)
    }

    /// Unbiased estimate `||Gx||^2 / m` of `||x||^2`.
    pub fn sq_norm_estimate(&self, x: &[f64]) -> Result<f64> {
        let y = self.apply(x)?;
        Ok(linalg::dot(&y, &y) / self.rows() as f64)
    }
}

/// Median of repeated estimates; even counts average the two middle values.
pub fn median_norm_estimate(estimates: &[f64]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput("median estimates"));
    }
    let mut v = estimates.to_vec();
    let mid = v.len() / 2;
    let (_, &mut hi, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if v.len() % 2 == 1 {
        return Ok(hi);
    }
    let lo = v[..mid].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(0.5 * (lo + hi))
}
