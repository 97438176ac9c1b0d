use nalgebra::{DMatrix, DVector};

use super::{LinearOperator, OpCounters};
use crate::linalg::DenseMatrix;

/// Explicit matrix behind the operator interface.
#[derive(Debug)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    counters: OpCounters,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self {
            matrix,
            counters: OpCounters::default(),
        }
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }

    fn compute_apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(x)).data.into()
    }

    fn compute_apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        (self.matrix.tr_mul(&DVector::from_column_slice(y))).data.into()
    }

    fn compute_rows(&self, idx: &[usize]) -> DenseMatrix {
        self.matrix.select_rows(idx)
    }

    fn compute_columns(&self, idx: &[usize]) -> DenseMatrix {
        self.matrix.select_columns(idx)
    }

    fn frobenius_norm_sq(&self) -> f64 {
        self.matrix.norm_squared()
    }
}

/// `diag(entries)`.
#[derive(Debug)]
pub struct DiagonalOperator {
    entries: Vec<f64>,
    counters: OpCounters,
}

impl DiagonalOperator {
    pub fn new(entries: Vec<f64>) -> Self {
        Self {
            entries,
            counters: OpCounters::default(),
        }
    }

    /// `diag(1, 1/h, ..., 1/h^(d-1))`.
    pub fn inverse_powers(h: f64, d: usize) -> Self {
        Self::new((0..d).map(|i| h.powi(-(i as i32))).collect())
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

impl LinearOperator for DiagonalOperator {
    fn nrows(&self) -> usize {
        self.entries.len()
    }

    fn ncols(&self) -> usize {
        self.entries.len()
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }

    fn compute_apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.entries).map(|(a, b)| a * b).collect()
    }

    fn compute_apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.compute_apply(y)
    }
}

/// Successive differences: `x -> (x2 - x1, ..., xd - x(d-1), 0)`.
#[derive(Debug)]
pub struct DifferenceOperator {
    d: usize,
    counters: OpCounters,
}

impl DifferenceOperator {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            counters: OpCounters::default(),
        }
    }
}

impl LinearOperator for DifferenceOperator {
    fn nrows(&self) -> usize {
        self.d
    }

    fn ncols(&self) -> usize {
        self.d
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }

    fn compute_apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for i in 0..self.d.saturating_sub(1) {
            out[i] = x[i + 1] - x[i];
        }
        out
    }

    fn compute_apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for i in 0..self.d.saturating_sub(1) {
            out[i] -= y[i];
            out[i + 1] += y[i];
        }
        out
    }
}

#[derive(Debug)]
pub struct IdentityOperator {
    d: usize,
    counters: OpCounters,
}

impl IdentityOperator {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            counters: OpCounters::default(),
        }
    }
}

impl LinearOperator for IdentityOperator {
    fn nrows(&self) -> usize {
        self.d
    }

    fn ncols(&self) -> usize {
        self.d
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }

    fn compute_apply(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn compute_apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        y.to_vec()
    }
}
