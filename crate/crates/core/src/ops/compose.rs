use std::sync::Arc;

use nalgebra::DMatrix;

use super::{check_indices, LinearOperator, OpCounters};
use crate::error::{check_len, Error, Result};
use crate::linalg::DenseMatrix;

// Inputs reaching `compute_*` were validated by the outer call, so the inner
// calls below cannot fail on dimensions.
const VALIDATED: &str = "dimensions validated by the outer operator";

/// Product `F1 F2 ... Fk`; `apply` runs the rightmost factor first.
pub struct ComposedOperator {
    factors: Vec<Arc<dyn LinearOperator>>,
    counters: OpCounters,
}

impl ComposedOperator {
    pub fn new(factors: Vec<Arc<dyn LinearOperator>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyInput("composition factors"));
        }
        for pair in factors.windows(2) {
            check_len("composition chain", pair[0].ncols(), pair[1].nrows())?;
        }
        Ok(Self {
            factors,
            counters: OpCounters::default(),
        })
    }

    pub fn factors(&self) -> &[Arc<dyn LinearOperator>] {
        &self.factors
    }
}

impl LinearOperator for ComposedOperator {
    fn nrows(&self) -> usize {
        self.factors[0].nrows()
    }

    fn ncols(&self) -> usize {
        self.factors[self.factors.len() - 1].ncols()
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }

    fn compute_apply(&self, x: &[f64]) -> Vec<f64> {
        self.factors
            .iter()
            .rev()
            .fold(x.to_vec(), |v, f| f.apply(&v).expect(VALIDATED))
    }

    fn compute_apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.factors
            .iter()
            .fold(y.to_vec(), |v, f| f.apply_transpose(&v).expect(VALIDATED))
    }

    fn compute_rows(&self, idx: &[usize]) -> DenseMatrix {
        let head = self.factors[0].rows(idx).expect(VALIDATED);
        let mut out = DMatrix::zeros(idx.len(), self.ncols());
        for r in 0..idx.len() {
            let row: Vec<f64> = head.row(r).iter().copied().collect();
            let row = self.factors[1..]
                .iter()
                .fold(row, |v, f| f.apply_transpose(&v).expect(VALIDATED));
            for (c, v) in row.into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        out
    }

    fn compute_columns(&self, idx: &[usize]) -> DenseMatrix {
        let last = self.factors.len() - 1;
        let tail = self.factors[last].columns(idx).expect(VALIDATED);
        let mut out = DMatrix::zeros(self.nrows(), idx.len());
        for c in 0..idx.len() {
            let col: Vec<f64> = tail.column(c).iter().copied().collect();
            let col = self.factors[..last]
                .iter()
                .rev()
                .fold(col, |v, f| f.apply(&v).expect(VALIDATED));
            out.column_mut(c).copy_from_slice(&col);
        }
        out
    }
}

/// `[A, b]`: the operator with `b` appended as a last column.
pub struct AugmentedOperator {
    inner: Arc<dyn LinearOperator>,
    b: Vec<f64>,
    counters: OpCounters,
}

impl AugmentedOperator {
    pub fn new(inner: Arc<dyn LinearOperator>, b: Vec<f64>) -> Result<Self> {
        check_len("augmented column", inner.nrows(), b.len())?;
        crate::error::check_finite("augmented column", &b)?;
        Ok(Self {
            inner,
            b,
            counters: OpCounters::default(),
        })
    }

    pub fn inner(&self) -> &Arc<dyn LinearOperator> {
        &self.inner
    }

    pub fn last_column(&self) -> &[f64] {
        &self.b
    }
}

impl LinearOperator for AugmentedOperator {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    fn ncols(&self) -> usize {
        self.inner.ncols() + 1
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }

    fn compute_apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.inner.ncols();
        let mut out = self.inner.apply(&x[..d]).expect(VALIDATED);
        let t = x[d];
        if t != 0.0 {
            for (o, b) in out.iter_mut().zip(&self.b) {
                *o += t * b;
            }
        }
        out
    }

    fn compute_apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = self.inner.apply_transpose(y).expect(VALIDATED);
        out.push(crate::linalg::dot(&self.b, y));
        out
    }

    fn compute_rows(&self, idx: &[usize]) -> DenseMatrix {
        let head = self.inner.rows(idx).expect(VALIDATED);
        let d = head.ncols();
        let mut out = head.insert_column(d, 0.0);
        for (r, &i) in idx.iter().enumerate() {
            out[(r, d)] = self.b[i];
        }
        out
    }

    fn compute_columns(&self, idx: &[usize]) -> DenseMatrix {
        let d = self.inner.ncols();
        let inner_idx: Vec<usize> = idx.iter().copied().filter(|&j| j < d).collect();
        let inner = self.inner.columns(&inner_idx).expect(VALIDATED);
        let mut out = DMatrix::zeros(self.nrows(), idx.len());
        let mut next = 0;
        for (c, &j) in idx.iter().enumerate() {
            if j < d {
                out.set_column(c, &inner.column(next));
                next += 1;
            } else {
                out.column_mut(c).copy_from_slice(&self.b);
            }
        }
        out
    }

    fn frobenius_norm_sq(&self) -> f64 {
        self.inner.frobenius_norm_sq() + crate::linalg::dot(&self.b, &self.b)
    }
}

/// Row restriction `P A` for an index list, by index bookkeeping only.
///
/// Products cost one product with the parent; nothing is materialized.
pub struct RowSubset<'a> {
    parent: &'a dyn LinearOperator,
    idx: Vec<usize>,
    counters: OpCounters,
}

impl<'a> RowSubset<'a> {
    pub fn new(parent: &'a dyn LinearOperator, idx: Vec<usize>) -> Result<Self> {
        check_indices(&idx, parent.nrows())?;
        Ok(Self {
            parent,
            idx,
            counters: OpCounters::default(),
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.idx
    }
}

impl LinearOperator for RowSubset<'_> {
    fn nrows(&self) -> usize {
        self.idx.len()
    }

    fn ncols(&self) -> usize {
        self.parent.ncols()
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }

    fn compute_apply(&self, x: &[f64]) -> Vec<f64> {
        let full = self.parent.apply(x).expect(VALIDATED);
        self.idx.iter().map(|&i| full[i]).collect()
    }

    fn compute_apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.parent.nrows()];
        for (&i, &v) in self.idx.iter().zip(y) {
            full[i] += v;
        }
        self.parent.apply_transpose(&full).expect(VALIDATED)
    }

    fn compute_rows(&self, idx: &[usize]) -> DenseMatrix {
        let mapped: Vec<usize> = idx.iter().map(|&r| self.idx[r]).collect();
        self.parent.rows(&mapped).expect(VALIDATED)
    }

    fn compute_columns(&self, idx: &[usize]) -> DenseMatrix {
        self.parent.columns(idx).expect(VALIDATED).select_rows(&self.idx)
    }
}

/// `A^T` as an operator; rows of the view are columns of the parent.
pub struct Transposed<'a> {
    parent: &'a dyn LinearOperator,
    counters: OpCounters,
}

impl<'a> Transposed<'a> {
    pub fn new(parent: &'a dyn LinearOperator) -> Self {
        Self {
            parent,
            counters: OpCounters::default(),
        }
    }
}

impl LinearOperator for Transposed<'_> {
    fn nrows(&self) -> usize {
        self.parent.ncols()
    }

    fn ncols(&self) -> usize {
        self.parent.nrows()
    }

    fn counters(&self) -> &OpCounters {
        &self.counters
    }

    fn compute_apply(&self, x: &[f64]) -> Vec<f64> {
        self.parent.apply_transpose(x).expect(VALIDATED)
    }

    fn compute_apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.parent.apply(y).expect(VALIDATED)
    }

    fn compute_rows(&self, idx: &[usize]) -> DenseMatrix {
        self.parent.columns(idx).expect(VALIDATED).transpose()
    }

    fn compute_columns(&self, idx: &[usize]) -> DenseMatrix {
        self.parent.rows(idx).expect(VALIDATED).transpose()
    }

    fn frobenius_norm_sq(&self) -> f64 {
        self.parent.frobenius_norm_sq()
    }
}
