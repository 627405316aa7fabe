//! Alignment matrices `Φ` for LE, LLE, LTSA and ISOMAP, and the
//! Gershgorin-shifted `Ψ = Φ + αI`.

use alloc::format;
use alloc::vec::Vec;
use core::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::graph::NeighborGraph;
use crate::linalg::{orthonormal_basis, symmetric_eigen_ascending};
use crate::matrix::SparseSymMatrix;
use crate::spectral::GershgorinCircles;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignmentMethod {
    Le,
    Lle,
    Ltsa,
    Isomap,
}

impl AlignmentMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AlignmentMethod::Le => "le",
            AlignmentMethod::Lle => "lle",
            AlignmentMethod::Ltsa => "ltsa",
            AlignmentMethod::Isomap => "isomap",
        }
    }
}

impl FromStr for AlignmentMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "le" => Ok(AlignmentMethod::Le),
            "lle" => Ok(AlignmentMethod::Lle),
            "ltsa" => Ok(AlignmentMethod::Ltsa),
            "isomap" => Ok(AlignmentMethod::Isomap),
            other => Err(invalid(format!(
                "unknown alignment method '{other}' (expected le, lle, ltsa, isomap)"
            ))),
        }
    }
}

/// Edge weighting of the LE Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeWeighting {
    /// `φ_ij = −d_ij`, `φ_ii = Σ_j d_ij`.
    #[default]
    Distance,
    /// `w_ij = exp(−d_ij² / t)` with `t` the mean squared edge length.
    HeatKernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignmentParams {
    /// Intrinsic dimension for LTSA and ISOMAP.
    pub d: usize,
    /// LLE local Gram regularization, relative to the Gram trace.
    pub lle_reg: f64,
    pub le_weighting: LeWeighting,
}

impl Default for AlignmentParams {
    fn default() -> Self {
        AlignmentParams {
            d: 2,
            lle_reg: 1e-3,
            le_weighting: LeWeighting::Distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMatrix {
    matrix: SparseSymMatrix,
    /// `None` for matrices supplied directly rather than built here.
    method: Option<AlignmentMethod>,
    graph_k: usize,
}

impl AlignmentMatrix {
    pub fn from_matrix(
        matrix: SparseSymMatrix,
        method: Option<AlignmentMethod>,
        graph_k: usize,
    ) -> Self {
        AlignmentMatrix {
            matrix,
            method,
            graph_k,
        }
    }

    pub fn matrix(&self) -> &SparseSymMatrix {
        &self.matrix
    }

    pub fn method(&self) -> Option<AlignmentMethod> {
        self.method
    }

    pub fn graph_k(&self) -> usize {
        self.graph_k
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// `1e-8 · max_i |φ_ii|`, the default positivity margin τ.
    pub fn default_margin(&self) -> f64 {
        let m = (0..self.n()).fold(0.0f64, |acc, i| acc.max(self.matrix.diag(i).abs()));
        1e-8 * m
    }
}

pub fn build_alignment(
    ds: &Dataset,
    g: &NeighborGraph,
    method: AlignmentMethod,
    params: &AlignmentParams,
) -> Result<AlignmentMatrix> {
    if g.n() != ds.len() {
        return Err(invalid(format!(
            "graph has {} nodes but the dataset has {} samples",
            g.n(),
            ds.len()
        )));
    }
    let matrix = match method {
        AlignmentMethod::Le => laplacian(g, params.le_weighting)?,
        AlignmentMethod::Lle => lle(ds, g, params.lle_reg)?,
        AlignmentMethod::Ltsa => ltsa(ds, g, params.d)?,
        AlignmentMethod::Isomap => isomap(g, params.d)?,
    };
    Ok(AlignmentMatrix {
        matrix,
        method: Some(method),
        graph_k: g.k(),
    })
}

fn laplacian(g: &NeighborGraph, weighting: LeWeighting) -> Result<SparseSymMatrix> {
    let edges = g.edges();
    let t = match weighting {
        LeWeighting::Distance => 0.0,
        LeWeighting::HeatKernel => {
            let mean = if edges.is_empty() {
                0.0
            } else {
                edges.iter().map(|e| e.2 * e.2).sum::<f64>() / edges.len() as f64
            };
            if mean > 0.0 {
                mean
            } else {
                1.0
            }
        }
    };
    let mut triplets = Vec::with_capacity(3 * edges.len());
    for &(i, j, d) in &edges {
        let w = match weighting {
            LeWeighting::Distance => d,
            LeWeighting::HeatKernel => libm::exp(-d * d / t),
        };
        triplets.push((i, i, w));
        triplets.push((j, j, w));
        triplets.push((i, j, -w));
    }
    SparseSymMatrix::from_triplets(g.n(), &triplets)
}

/// Sum-to-one reconstruction weights of each sample from its neighborhood,
/// as `(neighbor, weight)` lists in neighborhood order.
pub fn lle_weights(
    ds: &Dataset,
    g: &NeighborGraph,
    lle_reg: f64,
) -> Result<Vec<Vec<(usize, f64)>>> {
    if !(lle_reg >= 0.0) || !lle_reg.is_finite() {
        return Err(invalid(format!(
            "lle_reg must be finite and >= 0, got {lle_reg}"
        )));
    }
    let x = ds.samples();
    let mut out = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        let nb = g.neighborhood(i);
        let k = nb.len();
        if k == 0 {
            return Err(invalid(format!("node {i} has an empty neighborhood")));
        }
        let z = DMatrix::from_fn(x.nrows(), k, |r, c| x[(r, nb[c])] - x[(r, i)]);
        let mut gram = z.transpose() * &z;
        let ones = DVector::from_element(k, 1.0);
        let w = if lle_reg > 0.0 {
            let tr = gram.trace();
            let shift = if tr > 0.0 { lle_reg * tr } else { lle_reg };
            for d in 0..k {
                gram[(d, d)] += shift;
            }
            Cholesky::new(gram)
                .ok_or(Error::SingularLocalGram { node: i })?
                .solve(&ones)
        } else {
            let (vals, _) = symmetric_eigen_ascending(&gram)?;
            let top = vals[k - 1];
            if !(vals[0] > 1e-12 * top) {
                return Err(Error::SingularLocalGram { node: i });
            }
            Cholesky::new(gram)
                .ok_or(Error::SingularLocalGram { node: i })?
                .solve(&ones)
        };
        let total = w.sum();
        if !total.is_finite() || total == 0.0 {
            return Err(Error::SingularLocalGram { node: i });
        }
        out.push(
            nb.iter()
                .zip(w.iter())
                .map(|(&j, &wj)| (j, wj / total))
                .collect(),
        );
    }
    Ok(out)
}

fn lle(ds: &Dataset, g: &NeighborGraph, lle_reg: f64) -> Result<SparseSymMatrix> {
    // Φ = (I − W)ᵀ(I − W) = Σ_i v_i v_iᵀ with v_i = e_i − w_i.
    let weights = lle_weights(ds, g, lle_reg)?;
    let mut patches: Vec<(Vec<usize>, DMatrix<f64>)> = Vec::with_capacity(g.n());
    for (i, w) in weights.iter().enumerate() {
        let mut idx = Vec::with_capacity(w.len() + 1);
        let mut v = Vec::with_capacity(w.len() + 1);
        idx.push(i);
        v.push(1.0);
        for &(j, wj) in w {
            idx.push(j);
            v.push(-wj);
        }
        let v = DVector::from_vec(v);
        patches.push((idx, &v * v.transpose()));
    }
    Ok(SparseSymMatrix::from_blocks(
        g.n(),
        patches.iter().map(|(idx, b)| (idx.as_slice(), b.clone())),
    ))
}

fn ltsa(ds: &Dataset, g: &NeighborGraph, d: usize) -> Result<SparseSymMatrix> {
    let n = g.n();
    if d == 0 || d >= g.k().min(n) {
        return Err(invalid(format!(
            "LTSA needs 1 <= d < min(K, N) = {}, got d = {d}",
            g.k().min(n)
        )));
    }
    let x = ds.samples();
    let mut patches: Vec<(Vec<usize>, DMatrix<f64>)> = Vec::with_capacity(n);
    for i in 0..n {
        let mut idx = Vec::with_capacity(g.neighborhood(i).len() + 1);
        idx.push(i);
        idx.extend_from_slice(g.neighborhood(i));
        let m = idx.len();
        // Tangent coordinates from the top-d right singular vectors of the
        // patch centered at x_i.
        let y = DMatrix::from_fn(x.nrows(), m, |r, c| x[(r, idx[c])] - x[(r, i)]);
        let gram = y.transpose() * &y;
        let (vals, vecs) = symmetric_eigen_ascending(&gram)?;
        let top = vals[m - 1];
        if !(top > 0.0) || !(vals[m - d] > 1e-10 * top) {
            return Err(Error::RankDeficientPatch { node: i, d });
        }
        let mut span = DMatrix::zeros(m, d + 1);
        span.column_mut(0).fill(1.0 / libm::sqrt(m as f64));
        for c in 0..d {
            span.column_mut(c + 1).copy_from(&vecs.column(m - 1 - c));
        }
        let u = orthonormal_basis(&span, 1e-10);
        let proj = DMatrix::identity(m, m) - &u * u.transpose();
        patches.push((idx, proj));
    }
    Ok(SparseSymMatrix::from_blocks(
        n,
        patches.iter().map(|(idx, b)| (idx.as_slice(), b.clone())),
    ))
}

fn isomap(g: &NeighborGraph, d: usize) -> Result<SparseSymMatrix> {
    let n = g.n();
    if d == 0 || d >= g.k().min(n) {
        return Err(invalid(format!(
            "ISOMAP needs 1 <= d < min(K, N) = {}, got d = {d}",
            g.k().min(n)
        )));
    }
    g.require_connected()?;
    let sources: Vec<usize> = (0..n).collect();
    let mut dsq = g.geodesic_distances(&sources)?;
    dsq.iter_mut().for_each(|v| *v *= *v);
    let dsq = (&dsq + dsq.transpose()) * 0.5;
    // A = −½ P D P with P = I − eeᵀ/N (double centering).
    let row_mean: Vec<f64> = (0..n).map(|i| dsq.row(i).sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let a = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (dsq[(i, j)] - row_mean[i] - row_mean[j] + grand)
    });
    let (vals, vecs) = symmetric_eigen_ascending(&a)?;
    let lambda = |i: usize| vals[n - i];
    let q = |i: usize| vecs.column(n - i);
    let l1 = lambda(1);
    let mut phi = DMatrix::identity(n, n) * l1 - &a;
    for i in 2..=d {
        let qi = q(i);
        phi -= (qi * qi.transpose()) * (l1 - lambda(i));
    }
    phi.add_scalar_mut(-l1 / n as f64);
    let phi = (&phi + phi.transpose()) * 0.5;
    SparseSymMatrix::from_dense(&phi, 1e-12)
}

/// `Ψ = Φ + αI` with `α = max(0, −b_min) + τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedAlignment {
    matrix: SparseSymMatrix,
    alpha: f64,
    tau: f64,
    source: AlignmentMatrix,
}

impl RegularizedAlignment {
    pub fn matrix(&self) -> &SparseSymMatrix {
        &self.matrix
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn source(&self) -> &AlignmentMatrix {
        &self.source
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }
}

pub fn regularize_alignment(a: &AlignmentMatrix, tau: f64) -> Result<RegularizedAlignment> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(invalid(format!(
            "positivity margin tau must be finite and >= 0, got {tau}"
        )));
    }
    let circles = GershgorinCircles::of_sparse(a.matrix());
    let b_min = if a.n() == 0 { 0.0 } else { circles.lower };
    let alpha = (-b_min).max(0.0) + tau;
    Ok(RegularizedAlignment {
        matrix: a.matrix().shifted(alpha),
        alpha,
        tau,
        source: a.clone(),
    })
}
