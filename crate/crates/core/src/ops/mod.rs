//! Linear operators accessed only through matrix-vector products.
//!
//! Every operator carries an [`OpCounters`] block. The provided `apply` and
//! `apply_transpose` methods validate input, bump the matvec counter exactly
//! once and dispatch to the operator's `compute_*` kernel, so counts cannot
//! drift from the calls that actually happened. Explicit row or column reads
//! are tallied separately; they are how the samplers detect accidental dense
//! materialization.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;

use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::DenseMatrix;

mod basic;
mod compose;
mod toeplitz;

pub use basic::{DenseOperator, DiagonalOperator, DifferenceOperator, IdentityOperator};
pub use compose::{AugmentedOperator, ComposedOperator, RowSubset, Transposed};
pub use toeplitz::{ar_design_operator, pad_origin_zero, ToeplitzOperator};

/// Monotone access counters. Relaxed atomics: exact when single-threaded.
#[derive(Debug, Default)]
pub struct OpCounters {
    matvecs: AtomicU64,
    rows_read: AtomicU64,
    cols_read: AtomicU64,
}

impl OpCounters {
    pub fn matvecs(&self) -> u64 {
        self.matvecs.load(Ordering::Relaxed)
    }

    pub fn rows_read(&self) -> u64 {
        self.rows_read.load(Ordering::Relaxed)
    }

    pub fn cols_read(&self) -> u64 {
        self.cols_read.load(Ordering::Relaxed)
    }

    fn record_matvec(&self) {
        self.matvecs.fetch_add(1, Ordering::Relaxed);
    }
}

pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn counters(&self) -> &OpCounters;

    /// `A x` without validation or counting; `x.len() == ncols()`.
    fn compute_apply(&self, x: &[f64]) -> Vec<f64>;

    /// `A^T y` without validation or counting; `y.len() == nrows()`.
    fn compute_apply_transpose(&self, y: &[f64]) -> Vec<f64>;

    /// Dense rows `idx` as an `idx.len() x ncols` matrix.
    ///
    /// The default pays one transpose product per row.
    fn compute_rows(&self, idx: &[usize]) -> DenseMatrix {
        let mut out = DMatrix::zeros(idx.len(), self.ncols());
        let mut e = vec![0.0; self.nrows()];
        for (r, &i) in idx.iter().enumerate() {
            e[i] = 1.0;
            self.counters().record_matvec();
            let row = self.compute_apply_transpose(&e);
            e[i] = 0.0;
            for (c, v) in row.into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        out
    }

    /// Dense columns `idx` as an `nrows x idx.len()` matrix.
    fn compute_columns(&self, idx: &[usize]) -> DenseMatrix {
        let mut out = DMatrix::zeros(self.nrows(), idx.len());
        let mut e = vec![0.0; self.ncols()];
        for (c, &j) in idx.iter().enumerate() {
            e[j] = 1.0;
            self.counters().record_matvec();
            let col = self.compute_apply(&e);
            e[j] = 0.0;
            out.column_mut(c).copy_from_slice(&col);
        }
        out
    }

    /// `||A||_F^2`.
    fn frobenius_norm_sq(&self) -> f64 {
        let d = self.ncols();
        let mut total = 0.0;
        let mut start = 0;
        while start < d {
            let end = (start + 64).min(d);
            let idx: Vec<usize> = (start..end).collect();
            total += self.compute_columns(&idx).norm_squared();
            start = end;
        }
        total
    }

    fn matvec_count(&self) -> u64 {
        self.counters().matvecs()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("operator apply", self.ncols(), x.len())?;
        check_finite("operator apply", x)?;
        self.counters().record_matvec();
        Ok(self.compute_apply(x))
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("operator apply_transpose", self.nrows(), y.len())?;
        check_finite("operator apply_transpose", y)?;
        self.counters().record_matvec();
        Ok(self.compute_apply_transpose(y))
    }

    fn rows(&self, idx: &[usize]) -> Result<DenseMatrix> {
        check_indices(idx, self.nrows())?;
        self.counters()
            .rows_read
            .fetch_add(idx.len() as u64, Ordering::Relaxed);
        Ok(self.compute_rows(idx))
    }

    fn columns(&self, idx: &[usize]) -> Result<DenseMatrix> {
        check_indices(idx, self.ncols())?;
        self.counters()
            .cols_read
            .fetch_add(idx.len() as u64, Ordering::Relaxed);
        Ok(self.compute_columns(idx))
    }
}

pub(crate) fn check_indices(idx: &[usize], len: usize) -> Result<()> {
    match idx.iter().find(|&&i| i >= len) {
        Some(&index) => Err(Error::IndexOutOfRange { index, len }),
        None => Ok(()),
    }
}
