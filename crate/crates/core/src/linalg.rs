//! Dense helpers shared by the spectral, alignment and learner modules.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Flip `v` so that its largest-magnitude entry is positive (first such
/// entry on ties).
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if best_abs > 0.0 && v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Symmetric eigen-decomposition with eigenvalues in ascending order and
/// sign-fixed eigenvectors as columns.
pub fn symmetric_eigen_ascending(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidArgument(
            "eigen-decomposition of a non-square matrix".into(),
        ));
    }
    if let Some((i, j)) = first_non_finite(m) {
        return Err(Error::NonFinite {
            what: "matrix",
            row: i,
            col: j,
        });
    }
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        fix_sign(&mut col);
        vectors.column_mut(dst).copy_from_slice(&col);
    }
    Ok((values, vectors))
}

pub(crate) fn first_non_finite(m: &DMatrix<f64>) -> Option<(usize, usize)> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Some((i, j));
            }
        }
    }
    None
}

/// Orthonormal basis of the column span of `a` by modified Gram-Schmidt
/// (two passes); columns whose residual falls below `rel_tol` times their
/// original norm are dropped.
pub(crate) fn orthonormal_basis(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for j in 0..a.ncols() {
        let orig = a.column(j).into_owned();
        let norm0 = orig.norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = orig;
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&v);
                v.axpy(-p, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv > rel_tol * norm0 {
            basis.push(v / nv);
        }
    }
    let mut out = DMatrix::zeros(a.nrows(), basis.len());
    for (j, q) in basis.iter().enumerate() {
        out.column_mut(j).copy_from(q);
    }
    out
}

/// Squared Euclidean distance between columns `i` and `j` of `x`.
#[inline]
pub(crate) fn sq_dist(x: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    x.column(i)
        .iter()
        .zip(x.column(j).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

pub(crate) fn principal_submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}
