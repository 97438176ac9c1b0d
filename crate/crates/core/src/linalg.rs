//! Small dense kernels used on sampled (desk-sized) matrices.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;

/// Thin SVD with singular values sorted in decreasing order.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

pub fn sorted_svd(a: &DMatrix<f64>) -> Result<SortedSvd> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("svd input"));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("svd did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("svd did not return V^T".into()))?;
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v_t = DMatrix::from_fn(order.len(), v_t.ncols(), |r, c| v_t[(order[r], c)]);
    let singular_values = order.iter().map(|&i| s[i]).collect();
    Ok(SortedSvd {
        u,
        singular_values,
        v_t,
    })
}

/// Cut-off below which singular values are treated as zero.
pub fn rank_tolerance(singular_values: &[f64], rows: usize, cols: usize, rel: f64) -> f64 {
    let smax = singular_values.iter().cloned().fold(0.0, f64::max);
    smax * rows.max(cols) as f64 * rel
}

pub struct LstsqSolution {
    pub x: DVector<f64>,
    pub rank: usize,
    pub rank_deficient: bool,
}

/// Minimum-norm least squares via SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> Result<LstsqSolution> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "lstsq rhs",
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("lstsq rhs"));
    }
    let cols = a.ncols();
    if a.nrows() == 0 || cols == 0 {
        return Ok(LstsqSolution {
            x: DVector::zeros(cols),
            rank: 0,
            rank_deficient: cols > 0,
        });
    }
    let svd = sorted_svd(a)?;
    let tol = rank_tolerance(&svd.singular_values, a.nrows(), cols, rel_tol);
    let utb = svd.u.transpose() * b;
    let mut x = DVector::zeros(cols);
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol && s > 0.0 {
            rank += 1;
            let coef = utb[k] / s;
            for j in 0..cols {
                x[j] += coef * svd.v_t[(k, j)];
            }
        }
    }
    Ok(LstsqSolution {
        x,
        rank,
        rank_deficient: rank < cols,
    })
}

/// Moore-Penrose pseudo-inverse with the relative singular value cut-off.
pub fn pinv(a: &DMatrix<f64>, rel_tol: f64) -> Result<(DMatrix<f64>, usize)> {
    let svd = sorted_svd(a)?;
    let tol = rank_tolerance(&svd.singular_values, a.nrows(), a.ncols(), rel_tol);
    let mut out = DMatrix::zeros(a.ncols(), a.nrows());
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol && s > 0.0 {
            rank += 1;
            let vk = svd.v_t.row(k).transpose();
            let uk = svd.u.column(k);
            out += (vk / s) * uk.transpose();
        }
    }
    Ok((out, rank))
}

/// `Q^{+1/2}` and `Q^{1/2}` of a symmetric positive semidefinite matrix.
pub fn psd_roots(q: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, DMatrix<f64>, usize) {
    let sym = (q + q.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tol = lmax * q.nrows() as f64 * rel_tol;
    let n = q.nrows();
    let mut inv_root = DMatrix::zeros(n, n);
    let mut root = DMatrix::zeros(n, n);
    let mut rank = 0;
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > tol && lam > 0.0 {
            rank += 1;
            let v = eig.eigenvectors.column(k);
            let outer = v * v.transpose();
            inv_root += &outer / lam.sqrt();
            root += outer * lam.sqrt();
        }
    }
    (inv_root, root, rank)
}

/// `rows x cols` matrix of i.i.d. standard normals.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_p(a: &[f64], p: f64) -> f64 {
    a.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_svd_is_decreasing() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 5.0, 0.0, 0.0]);
        let s = sorted_svd(&a).unwrap();
        assert!((s.singular_values[0] - 5.0).abs() < 1e-12);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_mean_of_two_points() {
        let a = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![0.0, 2.0]);
        let sol = lstsq(&a, &b, 1e-14).unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!(!sol.rank_deficient);
    }

    #[test]
    fn lstsq_rank_deficient_is_min_norm() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let b = DVector::from_vec(vec![2.0, 4.0, 6.0]);
        let sol = lstsq(&a, &b, 1e-14).unwrap();
        assert!(sol.rank_deficient);
        assert_eq!(sol.rank, 1);
        assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pinv_of_singular_diagonal() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let (p, rank) = pinv(&a, 1e-14).unwrap();
        assert_eq!(rank, 1);
        assert!((p[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(p[(1, 1)], 0.0);
    }

    #[test]
    fn psd_roots_multiply_to_projector() {
        let q = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 9.0]);
        let (inv_root, root, rank) = psd_roots(&q, 1e-14);
        assert_eq!(rank, 2);
        let id = &inv_root * &root;
        assert!((id - DMatrix::identity(2, 2)).norm() < 1e-12);
        assert!((root[(1, 1)] - 3.0).abs() < 1e-12);
    }
}
