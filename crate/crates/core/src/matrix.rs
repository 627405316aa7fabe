//! Row-compressed storage for symmetric matrices.
//!
//! Both triangles are stored so that row scans (Gershgorin radii, GCLS
//! updates) touch one contiguous slice. Rows are sorted by column.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSymMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSymMatrix {
    pub fn zeros(n: usize) -> Self {
        SparseSymMatrix {
            n,
            rows: vec![Vec::new(); n],
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseSymMatrix {
            n,
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    /// Sums duplicate `(i, j, v)` entries in input order. Each entry is
    /// applied to both `(i, j)` and `(j, i)` unless `i == j`; pass only one
    /// triangle.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(alloc::format!(
                    "entry ({i},{j}) out of range for a {n}x{n} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "matrix",
                    row: i,
                    col: j,
                });
            }
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        for row in rows.iter_mut() {
            compress_row(row);
        }
        Ok(SparseSymMatrix { n, rows })
    }

    /// Accumulate `block` into the rows/columns `idx` (symmetric block).
    pub(crate) fn from_blocks<'a>(
        n: usize,
        blocks: impl Iterator<Item = (&'a [usize], DMatrix<f64>)>,
    ) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (idx, block) in blocks {
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    rows[i].push((j, block[(a, b)]));
                }
            }
        }
        for row in rows.iter_mut() {
            compress_row(row);
        }
        SparseSymMatrix { n, rows }
    }

    /// Keeps every nonzero entry; fails if `m` is not symmetric within
    /// `tol` (absolute, scaled by the largest entry).
    pub fn from_dense(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        check_symmetric(m, tol)?;
        let n = m.nrows();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                        (v != 0.0).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        Ok(SparseSymMatrix { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        match row.binary_search_by_key(&j, |&(c, _)| c) {
            Ok(p) => row[p].1,
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `self + alpha * I`.
    pub fn shifted(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        if alpha == 0.0 {
            return out;
        }
        for (i, row) in out.rows.iter_mut().enumerate() {
            match row.binary_search_by_key(&i, |&(c, _)| c) {
                Ok(p) => row[p].1 += alpha,
                Err(p) => row.insert(p, (i, alpha)),
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Dense `rows × cols` block.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        let mut pos = vec![usize::MAX; self.n];
        for (b, &j) in cols.iter().enumerate() {
            pos[j] = b;
        }
        let mut m = DMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for &(j, v) in &self.rows[i] {
                if pos[j] != usize::MAX {
                    m[(a, pos[j])] = v;
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum())
            .collect()
    }

    /// Euclidean norm of column `j` (= row `j`).
    pub fn column_norm(&self, j: usize) -> f64 {
        libm::sqrt(self.rows[j].iter().map(|&(_, v)| v * v).sum::<f64>())
    }

    /// Upper triangle plus diagonal as `(i, j, value)` sorted by `(i, j)`.
    pub fn upper_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                if j >= i {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }
}

fn compress_row(row: &mut Vec<(usize, f64)>) {
    row.sort_by_key(|&(c, _)| c);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for &(c, v) in row.iter() {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|&(_, v)| v != 0.0);
    *row = out;
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidArgument(alloc::format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if let Some((i, j)) = crate::linalg::first_non_finite(m) {
        return Err(Error::NonFinite {
            what: "matrix",
            row: i,
            col: j,
        });
    }
    let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (m[(i, j)] - m[(j, i)]).abs();
            if diff > tol * scale {
                return Err(Error::NotSymmetric {
                    row: i,
                    col: j,
                    diff,
                });
            }
        }
    }
    Ok(())
}
