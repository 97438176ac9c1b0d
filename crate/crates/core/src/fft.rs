//! Real convolution through complex FFTs.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_finite, check_len, Error, Result};

/// Forward/inverse transform pair of one power-of-two size.
#[derive(Clone)]
pub(crate) struct FftPair {
    pub size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("size", &self.size).finish()
    }
}

impl FftPair {
    pub fn new(min_size: usize) -> Self {
        let size = min_size.max(1).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    /// Spectrum of `values` zero-padded to `size`.
    pub fn spectrum(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        for (slot, &v) in buf.iter_mut().zip(values) {
            slot.re = v;
        }
        self.forward.process(&mut buf);
        buf
    }

    /// Cyclic convolution (length `size`) of `values` with a precomputed spectrum.
    pub fn convolve_with(&self, spectrum: &[Complex64], values: &[f64]) -> Vec<f64> {
        let mut buf = self.spectrum(values);
        for (b, s) in buf.iter_mut().zip(spectrum) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}

/// Linear convolution of two real sequences, length `a.len() + b.len() - 1`.
pub fn linear_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let fft = FftPair::new(out_len);
    let sa = fft.spectrum(a);
    let mut full = fft.convolve_with(&sa, b);
    full.truncate(out_len);
    full
}

/// `C x` for the circulant `C[i][j] = c[(i - j) mod m]`.
///
/// The cyclic product is recovered from a zero-padded power-of-two linear
/// convolution by folding the upper half back onto the lower half.
pub fn circulant_multiply(c: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let m = c.len();
    if m == 0 {
        return Err(Error::EmptyInput("circulant generator"));
    }
    check_len("circulant_multiply vector", m, x.len())?;
    check_finite("circulant generator", c)?;
    check_finite("circulant_multiply vector", x)?;
    let lin = linear_convolution(c, x);
    let mut out = lin[..m].to_vec();
    for (k, v) in lin[m..].iter().enumerate() {
        out[k] += v;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_circulant(c: &[f64], x: &[f64]) -> Vec<f64> {
        let m = c.len();
        (0..m)
            .map(|i| (0..m).map(|j| c[(i + m - j) % m] * x[j]).sum())
            .collect()
    }

    #[test]
    fn identity_circulant() {
        let mut c = vec![0.0; 5];
        c[0] = 1.0;
        let x = [3.0, -1.0, 2.5, 0.0, 7.0];
        let y = circulant_multiply(&c, &x).unwrap();
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_shift() {
        let y = circulant_multiply(&[0.0, 1.0, 0.0], &[1.0, 2.0, 3.0]).unwrap();
        let expect = [3.0, 1.0, 2.0];
        for (a, b) in y.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_dense_materialization() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [1usize, 2, 3, 7, 8, 13, 64, 100] {
            let c: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = circulant_multiply(&c, &x).unwrap();
            let z = dense_circulant(&c, &x);
            let bound = 1e-10 * m as f64 * crate::linalg::max_abs(&c) * crate::linalg::max_abs(&x);
            for (a, b) in y.iter().zip(&z) {
                assert!((a - b).abs() <= bound, "m={m}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            circulant_multiply(&[1.0, 2.0], &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(circulant_multiply(&[1.0, f64::NAN], &[1.0, 1.0]), Err(Error::NonFinite(_))));
        assert!(circulant_multiply(&[], &[]).is_err());
    }
}
