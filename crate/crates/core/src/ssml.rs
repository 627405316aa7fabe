//! Semi-supervised learners: LS label propagation, the Spec eigen-learner
//! and the plain spectral embedding.
//!
//! Label matrices are `d×N`-shaped (one column per sample), matching the
//! sample layout of [`Dataset`](crate::data::Dataset).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{first_non_finite, orthonormal_basis, symmetric_eigen_ascending};
use crate::matrix::SparseSymMatrix;

/// Landmark labels together with the predictions for the complement.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelAssignment {
    labeled_indices: Vec<usize>,
    labeled_values: DMatrix<f64>,
    predicted_indices: Vec<usize>,
    predicted_values: DMatrix<f64>,
}

impl LabelAssignment {
    pub fn labeled_indices(&self) -> &[usize] {
        &self.labeled_indices
    }

    /// `d×|L|`, columns in the order of `labeled_indices`.
    pub fn labeled_values(&self) -> &DMatrix<f64> {
        &self.labeled_values
    }

    /// Complement of the landmarks in ascending order.
    pub fn predicted_indices(&self) -> &[usize] {
        &self.predicted_indices
    }

    /// `d×|Ū|`, columns in the order of `predicted_indices`.
    pub fn predicted_values(&self) -> &DMatrix<f64> {
        &self.predicted_values
    }

    pub fn n(&self) -> usize {
        self.labeled_indices.len() + self.predicted_indices.len()
    }

    /// All `N` labels: given values at the landmarks, predictions elsewhere.
    pub fn full_labels(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.labeled_values.nrows(), self.n());
        for (k, &i) in self.labeled_indices.iter().enumerate() {
            out.set_column(i, &self.labeled_values.column(k));
        }
        for (k, &i) in self.predicted_indices.iter().enumerate() {
            out.set_column(i, &self.predicted_values.column(k));
        }
        out
    }
}

/// Validate the landmark list against `n` and the label matrix; returns the
/// ascending complement.
fn split(n: usize, z_l: &DMatrix<f64>, landmarks: &[usize]) -> Result<(Vec<bool>, Vec<usize>)> {
    if landmarks.is_empty() {
        return Err(invalid("landmark set is empty"));
    }
    if z_l.ncols() != landmarks.len() {
        return Err(invalid(format!(
            "label matrix has {} columns for {} landmarks",
            z_l.ncols(),
            landmarks.len()
        )));
    }
    if z_l.nrows() == 0 {
        return Err(invalid("label matrix has no rows"));
    }
    if let Some((row, col)) = first_non_finite(z_l) {
        return Err(Error::NonFinite {
            what: "labels",
            row,
            col,
        });
    }
    let mut mask = vec![false; n];
    for &l in landmarks {
        if l >= n || mask[l] {
            return Err(invalid(format!(
                "invalid or repeated landmark {l} for {n} samples"
            )));
        }
        mask[l] = true;
    }
    let rest = (0..n).filter(|&i| !mask[i]).collect();
    Ok((mask, rest))
}

/// LS learner: solves `(Φ_ŪŪ + γI) Ẑ_Ūᵀ = −Φ_ŪL Z_Lᵀ`.
///
/// Pass a regularized `Ψ` with `gamma = 0`, or the raw `Φ` with `gamma = α`;
/// both give the same system. With `gamma = 0` on a Laplacian-like matrix, any
/// unlabeled component with no landmark contact makes the system singular and
/// is reported.
pub fn ls_learn(
    phi: &SparseSymMatrix,
    z_l: &DMatrix<f64>,
    landmarks: &[usize],
    gamma: f64,
) -> Result<LabelAssignment> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid(format!(
            "gamma must be finite and >= 0, got {gamma}"
        )));
    }
    let (mask, rest) = split(phi.n(), z_l, landmarks)?;
    if gamma == 0.0 {
        check_harmonic_components(phi, &mask, &rest)?;
    }
    let m = rest.len();
    let mut a = phi.block(&rest, &rest);
    for i in 0..m {
        a[(i, i)] += gamma;
    }
    let rhs = -(phi.block(&rest, landmarks) * z_l.transpose());
    let sol = a
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::SingularSystem {
            component: rest.clone(),
        })?;
    Ok(LabelAssignment {
        labeled_indices: landmarks.to_vec(),
        labeled_values: z_l.clone(),
        predicted_indices: rest,
        predicted_values: sol.transpose(),
    })
}

/// Components of the unlabeled part of `Φ`'s pattern that neither touch a
/// landmark nor get pinned by a nonzero row sum leave the constant vector in
/// the null space of their block.
fn check_harmonic_components(phi: &SparseSymMatrix, mask: &[bool], rest: &[usize]) -> Result<()> {
    let n = phi.n();
    let scale = (0..n)
        .map(|i| phi.diag(i).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut seen = vec![false; n];
    for &start in rest {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut touches_landmark = false;
        let mut head = 0;
        while head < comp.len() {
            let i = comp[head];
            head += 1;
            for &(j, _) in phi.row(i) {
                if mask[j] {
                    touches_landmark = true;
                } else if !seen[j] {
                    seen[j] = true;
                    comp.push(j);
                }
            }
        }
        if touches_landmark {
            continue;
        }
        let pinned = comp.iter().any(|&i| {
            let s: f64 = phi.row(i).iter().map(|&(_, v)| v).sum();
            s.abs() > 1e-10 * scale
        });
        if !pinned {
            comp.sort_unstable();
            return Err(Error::SingularSystem { component: comp });
        }
    }
    Ok(())
}

/// `G = I − UUᵀ` with `U` an orthonormal basis of the columns of `[1, Z_Lᵀ]`.
pub fn label_projection(z_l: &DMatrix<f64>) -> DMatrix<f64> {
    let l = z_l.ncols();
    let mut c = DMatrix::from_element(l, z_l.nrows() + 1, 1.0);
    c.view_mut((0, 1), (l, z_l.nrows()))
        .copy_from(&z_l.transpose());
    let u = orthonormal_basis(&c, 1e-12);
    DMatrix::identity(l, l) - &u * u.transpose()
}

/// If the constant vector is an eigenvector of `m`, push it to the top of the
/// spectrum so that it is never among the smallest eigenvectors. Returns
/// whether it was.
fn deflate_constant(m: &mut DMatrix<f64>) -> bool {
    let n = m.nrows();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let row_sums: Vec<f64> = (0..n).map(|i| m.row(i).sum()).collect();
    let mean = row_sums.iter().sum::<f64>() / n as f64;
    if row_sums.iter().any(|s| (s - mean).abs() > 1e-8 * scale) {
        return false;
    }
    // Gershgorin width bounds the spread of the spectrum.
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
        lo = lo.min(m[(i, i)] - r);
        hi = hi.max(m[(i, i)] + r);
    }
    let shift = (hi - lo) + 1.0;
    m.add_scalar_mut(shift / n as f64);
    true
}

/// Columns: `d` eigenvectors of `m` with smallest eigenvalues after the
/// constant direction (if an eigenvector) is set aside; `skip_first` drops the
/// lowest one otherwise.
fn smallest_nontrivial(mut m: DMatrix<f64>, d: usize, skip_first: bool) -> Result<DMatrix<f64>> {
    let deflated = deflate_constant(&mut m);
    let (_, vecs) = symmetric_eigen_ascending(&m)?;
    let offset = usize::from(!deflated && skip_first);
    Ok(vecs.columns(offset, d).into_owned())
}

/// Eigenvectors of `M = Φ + γ·S_L G S_Lᵀ` used by the Spec learner, as a
/// `d×N` matrix with orthonormal rows.
pub fn spec_embedding(
    phi: &SparseSymMatrix,
    z_l: &DMatrix<f64>,
    landmarks: &[usize],
    gamma: f64,
    d: usize,
) -> Result<DMatrix<f64>> {
    let n = phi.n();
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!(
            "gamma must be finite and > 0, got {gamma}"
        )));
    }
    split(n, z_l, landmarks)?;
    if d == 0 || d >= n {
        return Err(invalid(format!(
            "embedding dimension must be in [1, {}), got {d}",
            n
        )));
    }
    let g = label_projection(z_l);
    let mut m = phi.to_dense();
    for (a, &i) in landmarks.iter().enumerate() {
        for (b, &j) in landmarks.iter().enumerate() {
            m[(i, j)] += gamma * g[(a, b)];
        }
    }
    let m = (&m + m.transpose()) * 0.5;
    Ok(smallest_nontrivial(m, d, false)?.transpose())
}

/// Spec learner: embeds with [`spec_embedding`] and fits an affine map from
/// the landmark coordinates to their labels by least squares.
pub fn spec_learn(
    phi: &SparseSymMatrix,
    z_l: &DMatrix<f64>,
    landmarks: &[usize],
    gamma: f64,
    d: usize,
) -> Result<LabelAssignment> {
    let (_, rest) = split(phi.n(), z_l, landmarks)?;
    if d < z_l.nrows() {
        return Err(invalid(format!(
            "embedding dimension {d} is below the label dimension {}",
            z_l.nrows()
        )));
    }
    if landmarks.len() < d + 1 {
        return Err(Error::RankDeficientFit {
            landmarks: landmarks.len(),
            required: d + 1,
        });
    }
    let y = spec_embedding(phi, z_l, landmarks, gamma, d)?;
    let design = |idx: &[usize]| {
        DMatrix::from_fn(
            idx.len(),
            d + 1,
            |r, c| if c < d { y[(c, idx[r])] } else { 1.0 },
        )
    };
    let x_l = design(landmarks);
    let svd = x_l.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    let w = svd
        .solve(&z_l.transpose(), eps)
        .map_err(|e| Error::Numerical(format!("affine fit failed: {e}")))?;
    let pred = design(&rest) * w;
    Ok(LabelAssignment {
        labeled_indices: landmarks.to_vec(),
        labeled_values: z_l.clone(),
        predicted_indices: rest,
        predicted_values: pred.transpose(),
    })
}

/// Unsupervised embedding: the `d` eigenvectors after the trivial one, as a
/// `d×N` matrix with orthonormal, sign-fixed rows.
pub fn embed(phi: &SparseSymMatrix, d: usize) -> Result<DMatrix<f64>> {
    let n = phi.n();
    if d == 0 || d >= n {
        return Err(invalid(format!(
            "embedding dimension must be in [1, {}), got {d}",
            n
        )));
    }
    Ok(smallest_nontrivial(phi.to_dense(), d, true)?.transpose())
}
