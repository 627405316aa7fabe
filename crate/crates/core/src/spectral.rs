//! Gershgorin circles, condition numbers, the learning-error bound and its
//! Gershgorin surrogate `Q`.
//!
//! For a landmark set `L` with complement `Ū`, the bound is
//!
//! ```text
//! κ(Ψ_ŪŪ) · (1/‖Ψ_ŪL‖ + 1/‖Ψ_ŪŪ‖)
//! ```
//!
//! and, with circle centers `c`, radii `r` and residual radii `s` (radius
//! inside `Ψ_ŪŪ`), its Gershgorin upper bound is
//!
//! ```text
//! Q(Ū) = (max(r−s) + max(c+s)) / (min(c−s) · max(r−s))      over i ∈ Ū
//! ```

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::linalg::{principal_submatrix, symmetric_eigen_ascending};
use crate::matrix::{check_symmetric, SparseSymMatrix};

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GershgorinCircles {
    pub centers: Vec<f64>,
    pub radii: Vec<f64>,
    /// `min_i (c_i − r_i)`.
    pub lower: f64,
    /// `max_i (c_i + r_i)`.
    pub upper: f64,
}

impl GershgorinCircles {
    fn from_parts(centers: Vec<f64>, radii: Vec<f64>) -> Self {
        let lower = centers
            .iter()
            .zip(&radii)
            .map(|(c, r)| c - r)
            .fold(f64::INFINITY, f64::min);
        let upper = centers
            .iter()
            .zip(&radii)
            .map(|(c, r)| c + r)
            .fold(f64::NEG_INFINITY, f64::max);
        GershgorinCircles {
            centers,
            radii,
            lower,
            upper,
        }
    }

    pub fn of_sparse(m: &SparseSymMatrix) -> Self {
        let n = m.n();
        let mut centers = vec![0.0; n];
        let mut radii = vec![0.0; n];
        for i in 0..n {
            for &(j, v) in m.row(i) {
                if j == i {
                    centers[i] = v;
                } else {
                    radii[i] += v.abs();
                }
            }
        }
        Self::from_parts(centers, radii)
    }
}

/// Circles of a dense symmetric matrix; every eigenvalue lies in
/// `[lower, upper]`.
pub fn gershgorin_circles(m: &DMatrix<f64>) -> Result<GershgorinCircles> {
    check_symmetric(m, SYMMETRY_TOL)?;
    let n = m.nrows();
    let centers = (0..n).map(|i| m[(i, i)]).collect();
    let radii = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum())
        .collect();
    Ok(GershgorinCircles::from_parts(centers, radii))
}

/// `λ_max / λ_min` of a symmetric positive definite matrix.
pub fn condition_number(m: &DMatrix<f64>) -> Result<f64> {
    check_symmetric(m, SYMMETRY_TOL)?;
    if m.nrows() == 0 {
        return Err(invalid("condition number of an empty matrix"));
    }
    let (vals, _) = symmetric_eigen_ascending(m)?;
    let lo = vals[0];
    let hi = vals[vals.len() - 1];
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: lo });
    }
    Ok(hi / lo)
}

fn landmark_mask(n: usize, landmarks: &[usize]) -> Result<Vec<bool>> {
    if landmarks.is_empty() {
        return Err(invalid("landmark set is empty"));
    }
    let mut mask = vec![false; n];
    for &l in landmarks {
        if l >= n {
            return Err(invalid(format!(
                "landmark {l} out of range for {n} samples"
            )));
        }
        if mask[l] {
            return Err(invalid(format!("landmark {l} listed twice")));
        }
        mask[l] = true;
    }
    if landmarks.len() == n {
        return Err(invalid("landmark set leaves no unlabeled sample"));
    }
    Ok(mask)
}

/// `(‖Ψ_ŪL‖, ‖Ψ_ŪŪ‖)` where `‖Ψ_ŪL‖ = max_{i∈Ū} Σ_{j∈L} |ψ_ij|` (the
/// landmark-coverage term, equal to `max_{i∈Ū}(r_i − s_i)`) and
/// `‖Ψ_ŪŪ‖ = max_{i∈Ū} Σ_{j∈Ū} |ψ_ij|` (the ℓ1 norm of the symmetric block).
pub fn block_l1_norms(psi: &SparseSymMatrix, landmarks: &[usize]) -> Result<(f64, f64)> {
    let mask = landmark_mask(psi.n(), landmarks)?;
    let mut norm_ul: f64 = 0.0;
    let mut norm_uu: f64 = 0.0;
    for i in (0..psi.n()).filter(|&i| !mask[i]) {
        let (mut to_l, mut to_u) = (0.0, 0.0);
        for &(j, v) in psi.row(i) {
            if mask[j] {
                to_l += v.abs();
            } else {
                to_u += v.abs();
            }
        }
        norm_ul = norm_ul.max(to_l);
        norm_uu = norm_uu.max(to_u);
    }
    Ok((norm_ul, norm_uu))
}

/// `κ(Ψ_ŪŪ)(1/‖Ψ_ŪL‖ + 1/‖Ψ_ŪŪ‖)`; `+inf` when no unlabeled sample touches
/// a landmark.
pub fn error_bound(psi: &SparseSymMatrix, landmarks: &[usize]) -> Result<f64> {
    let (norm_ul, norm_uu) = block_l1_norms(psi, landmarks)?;
    if norm_ul == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mask = landmark_mask(psi.n(), landmarks)?;
    let unlabeled: Vec<usize> = (0..psi.n()).filter(|&i| !mask[i]).collect();
    let kappa = condition_number(&psi.block(&unlabeled, &unlabeled))?;
    Ok(kappa * (1.0 / norm_ul + 1.0 / norm_uu))
}

/// `Q` from the three extrema over `Ū`; `+inf` on a degenerate denominator.
pub(crate) fn q_from_extrema(max_r_minus_s: f64, max_c_plus_s: f64, min_c_minus_s: f64) -> f64 {
    if !(min_c_minus_s > 0.0) || !(max_r_minus_s > 0.0) {
        return f64::INFINITY;
    }
    (max_r_minus_s + max_c_plus_s) / (min_c_minus_s * max_r_minus_s)
}

/// Circle data of `Ψ` and the residual radii `s_i = Σ_{j∈Ū∖i} |ψ_ij|` of the
/// current unlabeled set `Ū`.
#[derive(Debug, Clone, PartialEq)]
pub struct GershgorinState {
    centers: Vec<f64>,
    radii: Vec<f64>,
    residual: Vec<f64>,
    unlabeled: Vec<bool>,
    n_unlabeled: usize,
}

impl GershgorinState {
    /// Everything unlabeled: `s = r`.
    pub fn new(psi: &SparseSymMatrix) -> Self {
        let circles = GershgorinCircles::of_sparse(psi);
        let n = psi.n();
        GershgorinState {
            residual: circles.radii.clone(),
            centers: circles.centers,
            radii: circles.radii,
            unlabeled: vec![true; n],
            n_unlabeled: n,
        }
    }

    /// Residual radii computed from scratch for the given unlabeled set.
    pub fn with_unlabeled(psi: &SparseSymMatrix, unlabeled: &[usize]) -> Result<Self> {
        let n = psi.n();
        let mut mask = vec![false; n];
        for &u in unlabeled {
            if u >= n || mask[u] {
                return Err(invalid(format!("invalid or repeated unlabeled index {u}")));
            }
            mask[u] = true;
        }
        let circles = GershgorinCircles::of_sparse(psi);
        let residual = (0..n)
            .map(|i| {
                if !mask[i] {
                    return 0.0;
                }
                psi.row(i)
                    .iter()
                    .filter(|&&(j, _)| j != i && mask[j])
                    .map(|&(_, v)| v.abs())
                    .sum()
            })
            .collect();
        Ok(GershgorinState {
            centers: circles.centers,
            radii: circles.radii,
            residual,
            unlabeled: mask,
            n_unlabeled: unlabeled.len(),
        })
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn residual_radii(&self) -> &[f64] {
        &self.residual
    }

    pub fn is_unlabeled(&self, i: usize) -> bool {
        self.unlabeled[i]
    }

    pub fn n_unlabeled(&self) -> usize {
        self.n_unlabeled
    }

    pub fn unlabeled_indices(&self) -> Vec<usize> {
        (0..self.unlabeled.len())
            .filter(|&i| self.unlabeled[i])
            .collect()
    }

    /// Move `idx` from `Ū` to the landmarks and shrink the residual radii of
    /// its unlabeled neighbors by `|ψ_j,idx|`.
    pub fn remove(&mut self, psi: &SparseSymMatrix, idx: usize) -> Result<()> {
        if idx >= self.unlabeled.len() || !self.unlabeled[idx] {
            return Err(invalid(format!("index {idx} is not currently unlabeled")));
        }
        self.unlabeled[idx] = false;
        self.n_unlabeled -= 1;
        self.residual[idx] = 0.0;
        for &(j, v) in psi.row(idx) {
            if j != idx && self.unlabeled[j] {
                self.residual[j] = (self.residual[j] - v.abs()).max(0.0);
            }
        }
        Ok(())
    }
}

/// `Q(Ū)` for the state's current unlabeled set.
pub fn surrogate_q(state: &GershgorinState) -> Result<f64> {
    if state.n_unlabeled == 0 {
        return Err(invalid("surrogate Q needs a nonempty unlabeled set"));
    }
    let (mut max_rs, mut max_cs, mut min_cs) =
        (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for i in (0..state.unlabeled.len()).filter(|&i| state.unlabeled[i]) {
        let (c, r, s) = (state.centers[i], state.radii[i], state.residual[i]);
        max_rs = max_rs.max(r - s);
        max_cs = max_cs.max(c + s);
        min_cs = min_cs.min(c - s);
    }
    Ok(q_from_extrema(max_rs, max_cs, min_cs))
}

/// Principal matrix logarithm `V·diag(ln λ)·Vᵀ` of a symmetric PD matrix.
pub fn sym_matrix_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_symmetric(m, SYMMETRY_TOL)?;
    let (vals, vecs) = symmetric_eigen_ascending(m)?;
    if !vals.is_empty() && !(vals[0] > 0.0) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: vals[0],
        });
    }
    let mut scaled = vecs.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= libm::log(vals[k]);
    }
    let out = scaled * vecs.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

pub const BRUTE_FORCE_MAX_N: usize = 20;

/// Exhaustive search over all `C(N, L)` deletions for the principal
/// submatrix of smallest condition number. Returns the deleted indices
/// (lexicographically first among ties) and that condition number; a
/// singular remainder counts as `+inf`.
pub fn brute_force_best_submatrix(psi: &DMatrix<f64>, l: usize) -> Result<(Vec<usize>, f64)> {
    check_symmetric(psi, SYMMETRY_TOL)?;
    let n = psi.nrows();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    if l >= n {
        return Err(invalid(format!("L must be below N = {n}, got {l}")));
    }
    let mut deleted: Vec<usize> = (0..l).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let keep: Vec<usize> = {
            let mut mask = vec![true; n];
            deleted.iter().for_each(|&d| mask[d] = false);
            (0..n).filter(|&i| mask[i]).collect()
        };
        let kappa = condition_number(&principal_submatrix(psi, &keep)).unwrap_or(f64::INFINITY);
        if best.as_ref().is_none_or(|(_, b)| kappa < *b) {
            best = Some((deleted.clone(), kappa));
        }
        if !next_combination(&mut deleted, n) {
            break;
        }
    }
    Ok(best.expect("at least one combination"))
}

/// Advance `c` (strictly increasing, values < n) to the next combination in
/// lexicographic order; false when exhausted.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0])
    }

    fn sparse(m: &DMatrix<f64>) -> SparseSymMatrix {
        SparseSymMatrix::from_dense(m, 0.0).unwrap()
    }

    #[test]
    fn circles_examples() {
        let c = gershgorin_circles(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!((c.lower, c.upper), (1.0, 1.0));
        assert_eq!(c.radii, vec![0.0; 3]);
        let c = gershgorin_circles(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert_eq!(
            (c.centers.clone(), c.radii.clone()),
            (vec![2.0, 2.0], vec![1.0, 1.0])
        );
        assert_eq!((c.lower, c.upper), (1.0, 3.0));
        let lap = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        let c = gershgorin_circles(&lap).unwrap();
        assert_eq!((c.lower, c.upper), (0.0, 4.0));
    }

    #[test]
    fn circles_reject_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            gershgorin_circles(&m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn condition_examples() {
        assert!((condition_number(&DMatrix::identity(4, 4)).unwrap() - 1.0).abs() < 1e-12);
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 10.0]);
        assert!((condition_number(&d).unwrap() - 10.0).abs() < 1e-12);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((condition_number(&m).unwrap() - 3.0).abs() < 1e-12);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            condition_number(&bad),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn block_norm_examples() {
        assert_eq!(block_l1_norms(&sparse(&tri()), &[0]).unwrap(), (1.0, 3.0));
        assert_eq!(
            block_l1_norms(&SparseSymMatrix::identity(3), &[0]).unwrap(),
            (0.0, 1.0)
        );
        let (_, uu) = block_l1_norms(&sparse(&tri()), &[0, 2]).unwrap();
        assert_eq!(uu, 2.0);
        assert!(block_l1_norms(&sparse(&tri()), &[]).is_err());
        assert!(block_l1_norms(&sparse(&tri()), &[0, 1, 2]).is_err());
        assert!(block_l1_norms(&sparse(&tri()), &[0, 0]).is_err());
    }

    #[test]
    fn bound_examples() {
        let v = error_bound(&sparse(&tri()), &[0]).unwrap();
        assert!((v - 4.0).abs() < 1e-12, "{v}");
        assert!(error_bound(&SparseSymMatrix::identity(3), &[0])
            .unwrap()
            .is_infinite());
        let d2 = sparse(&(DMatrix::identity(3, 3) * 2.0));
        assert!(error_bound(&d2, &[0]).unwrap().is_infinite());
    }

    #[test]
    fn q_examples() {
        let psi = sparse(&tri());
        let st = GershgorinState::with_unlabeled(&psi, &[1, 2]).unwrap();
        assert_eq!(st.centers(), &[2.0, 2.0, 2.0]);
        assert_eq!(st.radii(), &[1.0, 2.0, 1.0]);
        assert_eq!(&st.residual_radii()[1..], &[1.0, 1.0]);
        assert_eq!(surrogate_q(&st).unwrap(), 4.0);

        let lap = sparse(&DMatrix::from_row_slice(
            3,
            3,
            &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0],
        ));
        assert!(surrogate_q(&GershgorinState::new(&lap))
            .unwrap()
            .is_infinite());

        let d = sparse(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]));
        assert!(surrogate_q(&GershgorinState::new(&d))
            .unwrap()
            .is_infinite());

        let empty = GershgorinState::with_unlabeled(&d, &[]).unwrap();
        assert!(surrogate_q(&empty).is_err());
    }

    #[test]
    fn incremental_matches_scratch() {
        let psi = sparse(&tri());
        let mut st = GershgorinState::new(&psi);
        st.remove(&psi, 0).unwrap();
        let scratch = GershgorinState::with_unlabeled(&psi, &[1, 2]).unwrap();
        assert_eq!(st, scratch);
        assert!(st.remove(&psi, 0).is_err());
    }

    #[test]
    fn log_examples() {
        let z = sym_matrix_log(&DMatrix::identity(3, 3)).unwrap();
        assert!(z.abs().max() < 1e-15);
        let e = core::f64::consts::E;
        let d = DMatrix::from_row_slice(2, 2, &[e, 0.0, 0.0, e * e]);
        let l = sym_matrix_log(&d).unwrap();
        assert!(
            (l - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]))
                .abs()
                .max()
                < 1e-12
        );
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(sym_matrix_log(&bad).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let (del, k) = brute_force_best_submatrix(&tri(), 1).unwrap();
        assert_eq!(del, vec![1]);
        assert!((k - 1.0).abs() < 1e-12);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 9.0]));
        let (del, k) = brute_force_best_submatrix(&d, 1).unwrap();
        assert_eq!((del, k), (vec![2], 1.0));
        let (del, k) = brute_force_best_submatrix(&tri(), 2).unwrap();
        assert_eq!((del, k), (vec![0, 1], 1.0));
        assert!(matches!(
            brute_force_best_submatrix(&DMatrix::identity(21, 21), 1),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut c = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut c, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
    }
}
