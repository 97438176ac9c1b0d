use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;

use super::{LinearOperator, OpCounters};
use crate::error::{check_finite, Error, Result};
use crate::fft::FftPair;
use crate::linalg::DenseMatrix;

/// Truncated Toeplitz matrix `A[i][j] = g[i - j + d - 1]`, `n x d`.
///
/// Row `i` reads `(g[i+d-1], g[i+d-2], ..., g[i])`, so `g` holds `n + d - 1`
/// values in the order they appear down the first column followed by the
/// first row reversed. Products go through one cyclic convolution of the
/// smallest power-of-two size `>= n + d - 1`.
#[derive(Debug)]
pub struct ToeplitzOperator {
    n: usize,
    d: usize,
    g: Vec<f64>,
    fft: FftPair,
    g_hat: Vec<Complex64>,
    /// prefix sums of g^2, for the Frobenius norm
    g_sq_prefix: Vec<f64>,
    counters: OpCounters,
}

impl ToeplitzOperator {
    pub fn new(g: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidParameter(format!(
                "Toeplitz dimensions must be positive, got {n}x{d}"
            )));
        }
        if g.len() != n + d - 1 {
            return Err(Error::DimensionMismatch {
                context: "Toeplitz generating sequence",
                expected: n + d - 1,
                actual: g.len(),
            });
        }
        check_finite("Toeplitz generating sequence", &g)?;
        let fft = FftPair::new(n + d - 1);
        let g_hat = fft.spectrum(&g);
        let mut g_sq_prefix = Vec::with_capacity(g.len() + 1);
        g_sq_prefix.push(0.0);
        let mut acc = 0.0;
        for v in &g {
            acc += v * v;
            g_sq_prefix.push(acc);
        }
        Ok(Self {
            n,
            d,
            g,
            fft,
            g_hat,
            g_sq_prefix,
            counters: OpCounters::default(),
        })
    }

    pub fn generator(&self) -> &[f64] {
        &self.g
    }

    /// Size of the circulant embedding used for products.
    pub fn embedding_size(&self) -> usize {
        self.fft.size
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.g[i + self.d - 1 - j]
    }
}

impl LinearOperator for ToeplitzOperator {
    fn nrows(&self) -> usize {
        self.n
    }

    fn ncols(&self) -> usize {
        self.d
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }

    fn compute_apply(&self, x: &[f64]) -> Vec<f64> {
        // y_i = (g * x)[i + d - 1]; indices never wrap for size >= n + d - 1
        let conv = self.fft.convolve_with(&self.g_hat, x);
        conv[self.d - 1..self.d - 1 + self.n].to_vec()
    }

    fn compute_apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        // z_j = (g * rev(y))[n + d - 2 - j]
        let rev: Vec<f64> = y.iter().rev().copied().collect();
        let conv = self.fft.convolve_with(&self.g_hat, &rev);
        let top = self.n + self.d - 2;
        (0..self.d).map(|j| conv[top - j]).collect()
    }

    fn compute_rows(&self, idx: &[usize]) -> DenseMatrix {
        DMatrix::from_fn(idx.len(), self.d, |r, j| self.entry(idx[r], j))
    }

    fn compute_columns(&self, idx: &[usize]) -> DenseMatrix {
        DMatrix::from_fn(self.n, idx.len(), |i, c| self.entry(i, idx[c]))
    }

    fn frobenius_norm_sq(&self) -> f64 {
        // column j covers g[d-1-j .. d-1-j+n]
        (0..self.d)
            .map(|j| {
                let lo = self.d - 1 - j;
                self.g_sq_prefix[lo + self.n] - self.g_sq_prefix[lo]
            })
            .sum()
    }
}

/// Autoregressive design operator: row `i` is `(b[i+d-1], ..., b[i])`.
///
/// Uses the first `n + d - 1` values of `series`. Unless
/// `allow_underdetermined` is set, `d >= n` is rejected.
pub fn ar_design_operator(
    series: &[f64],
    n: usize,
    d: usize,
    allow_underdetermined: bool,
) -> Result<ToeplitzOperator> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "design dimensions must be positive, got n={n}, d={d}"
        )));
    }
    if series.len() < n + d - 1 {
        return Err(Error::SeriesTooShort {
            needed: n + d - 1,
            actual: series.len(),
        });
    }
    if d >= n && !allow_underdetermined {
        return Err(Error::Underdetermined { rows: n, cols: d });
    }
    ToeplitzOperator::new(series[..n + d - 1].to_vec(), n, d)
}

/// Prepends the origin value `b_1 = 0`.
pub fn pad_origin_zero(series: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len() + 1);
    out.push(0.0);
    out.extend_from_slice(series);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::toeplitz_dense;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn identity_when_generator_is_unit_spike() {
        let d = 5;
        let mut g = vec![0.0; 2 * d - 1];
        g[d - 1] = 1.0;
        let op = ToeplitzOperator::new(g, d, d).unwrap();
        let x = [1.0, -2.0, 3.0, 0.5, 4.0];
        close(&op.apply(&x).unwrap(), &x, 1e-12);
        close(&op.apply_transpose(&x).unwrap(), &x, 1e-12);
    }

    #[test]
    fn small_instance_apply_and_transpose() {
        let op = ToeplitzOperator::new(vec![1.0, 2.0, 3.0, 4.0], 3, 2).unwrap();
        close(&op.apply(&[1.0, 1.0]).unwrap(), &[3.0, 5.0, 7.0], 1e-12);
        close(&op.apply_transpose(&[1.0, 0.0, 0.0]).unwrap(), &[2.0, 1.0], 1e-12);
        close(&op.apply(&[0.0, 0.0]).unwrap(), &[0.0, 0.0, 0.0], 0.0);
    }

    #[test]
    fn transpose_is_linear() {
        let op = ToeplitzOperator::new(vec![0.3, -1.0, 2.0, 0.7, 1.1, -0.4], 4, 3).unwrap();
        let y1 = [1.0, 2.0, -1.0, 0.5];
        let y2 = [-0.5, 0.0, 3.0, 1.0];
        let sum: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a + b).collect();
        let lhs = op.apply_transpose(&sum).unwrap();
        let a = op.apply_transpose(&y1).unwrap();
        let b = op.apply_transpose(&y2).unwrap();
        let rhs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        close(&lhs, &rhs, 1e-12);
    }

    #[test]
    fn rows_follow_storage_order() {
        let op = ToeplitzOperator::new(vec![1.0, 2.0, 3.0, 4.0], 3, 2).unwrap();
        let dense = toeplitz_dense(op.generator(), 3, 2);
        assert_eq!(dense, DMatrix::from_row_slice(3, 2, &[2.0, 1.0, 3.0, 2.0, 4.0, 3.0]));
        // each row is the previous one shifted right with a new leading entry
        for i in 1..3 {
            assert_eq!(dense[(i, 1)], dense[(i - 1, 0)]);
        }
    }

    #[test]
    fn embedding_is_next_power_of_two() {
        let op = ToeplitzOperator::new(vec![0.0; 100 + 8 - 1], 100, 8).unwrap();
        assert_eq!(op.embedding_size(), 128);
        let op = ToeplitzOperator::new(vec![0.0; 121 + 8 - 1], 121, 8).unwrap();
        assert_eq!(op.embedding_size(), 128);
        let op = ToeplitzOperator::new(vec![0.0; 122 + 8 - 1], 122, 8).unwrap();
        assert_eq!(op.embedding_size(), 256);
    }

    #[test]
    fn ar_design_rows() {
        let op = ar_design_operator(&[0.0, 1.0, 2.0, 3.0, 4.0], 3, 2, false).unwrap();
        let rows = op.rows(&[0, 1, 2]).unwrap();
        assert_eq!(rows, DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 1.0, 3.0, 2.0]));
        let col = ar_design_operator(&[5.0, 6.0, 7.0], 3, 1, false).unwrap();
        assert_eq!(col.columns(&[0]).unwrap().as_slice(), &[5.0, 6.0, 7.0]);
    }

    #[test]
    fn ar_design_errors() {
        assert!(matches!(
            ar_design_operator(&[1.0, 2.0], 3, 2, false),
            Err(Error::SeriesTooShort { needed: 4, actual: 2 })
        ));
        assert!(matches!(
            ar_design_operator(&[1.0; 10], 3, 3, false),
            Err(Error::Underdetermined { .. })
        ));
        assert!(ar_design_operator(&[1.0; 10], 3, 3, true).is_ok());
        assert!(ToeplitzOperator::new(vec![1.0; 3], 3, 2).is_err());
        assert!(ToeplitzOperator::new(vec![1.0, f64::INFINITY, 0.0, 0.0], 3, 2).is_err());
    }

    #[test]
    fn pad_prepends_zero() {
        assert_eq!(pad_origin_zero(&[3.0, 4.0]), vec![0.0, 3.0, 4.0]);
    }
}
