//! Datasets, synthetic manifolds, noise injection and PCA.

use alloc::format;
use alloc::string::String;
use core::f64::consts::PI;
use core::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{first_non_finite, symmetric_eigen_ascending};

/// Samples are stored column-wise (`D × N`); labels, when present, are
/// `d × N` and share the column index.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: DMatrix<f64>,
    labels: Option<DMatrix<f64>>,
    name: String,
    seed: Option<u64>,
}

impl Dataset {
    pub fn new(
        samples: DMatrix<f64>,
        labels: Option<DMatrix<f64>>,
        name: impl Into<String>,
    ) -> Result<Self> {
        if samples.nrows() == 0 || samples.ncols() == 0 {
            return Err(invalid("dataset needs at least one sample and one feature"));
        }
        if let Some((r, c)) = first_non_finite(&samples) {
            return Err(Error::NonFinite {
                what: "samples",
                row: r,
                col: c,
            });
        }
        if let Some(z) = &labels {
            if z.ncols() != samples.ncols() {
                return Err(invalid(format!(
                    "label matrix has {} columns but there are {} samples",
                    z.ncols(),
                    samples.ncols()
                )));
            }
            if z.nrows() == 0 {
                return Err(invalid("label matrix has zero rows"));
            }
            if let Some((r, c)) = first_non_finite(z) {
                return Err(Error::NonFinite {
                    what: "labels",
                    row: r,
                    col: c,
                });
            }
        }
        Ok(Dataset {
            samples,
            labels,
            name: name.into(),
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn labels(&self) -> Option<&DMatrix<f64>> {
        self.labels.as_ref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }

    /// Ambient dimension `D`.
    pub fn dim(&self) -> usize {
        self.samples.nrows()
    }

    pub fn label_dim(&self) -> usize {
        self.labels.as_ref().map_or(0, |z| z.nrows())
    }

    /// Label columns at `idx`, in that order.
    pub fn labels_at(&self, idx: &[usize]) -> Option<DMatrix<f64>> {
        self.labels
            .as_ref()
            .map(|z| DMatrix::from_fn(z.nrows(), idx.len(), |r, c| z[(r, idx[c])]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    SwissRoll,
    SCurve,
    PlanePatch,
    Grid2d,
}

impl SyntheticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SyntheticKind::SwissRoll => "swiss_roll",
            SyntheticKind::SCurve => "s_curve",
            SyntheticKind::PlanePatch => "plane_patch",
            SyntheticKind::Grid2d => "grid2d",
        }
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "swiss_roll" => Ok(SyntheticKind::SwissRoll),
            "s_curve" => Ok(SyntheticKind::SCurve),
            "plane_patch" => Ok(SyntheticKind::PlanePatch),
            "grid2d" => Ok(SyntheticKind::Grid2d),
            other => Err(invalid(format!(
                "unknown synthetic kind '{other}' (expected swiss_roll, s_curve, plane_patch, grid2d)"
            ))),
        }
    }
}

// Fixed affine chart of the plane patch: x = ORIGIN + u*AXIS_U + v*AXIS_V.
const PLANE_ORIGIN: [f64; 3] = [1.0, -2.0, 0.5];
const PLANE_AXIS_U: [f64; 3] = [1.0, 0.5, 0.2];
const PLANE_AXIS_V: [f64; 3] = [-0.3, 1.0, 0.8];

/// Sample `n` points of a synthetic manifold. Labels are the generating
/// latent coordinates. `ambient_noise` is the variance of isotropic Gaussian
/// noise added to the samples (labels stay clean).
pub fn generate_synthetic(
    kind: SyntheticKind,
    n: usize,
    seed: u64,
    ambient_noise: f64,
) -> Result<Dataset> {
    if n < 4 {
        return Err(invalid(format!("synthetic datasets need n >= 4, got {n}")));
    }
    if !(ambient_noise >= 0.0) || !ambient_noise.is_finite() {
        return Err(invalid(
            "ambient_noise must be a finite nonnegative variance",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (samples, labels) = match kind {
        SyntheticKind::SwissRoll => {
            let mut x = DMatrix::zeros(3, n);
            let mut z = DMatrix::zeros(2, n);
            for i in 0..n {
                let t = 1.5 * PI * (1.0 + 2.0 * rng.random::<f64>());
                let h = 21.0 * rng.random::<f64>();
                x[(0, i)] = t * libm::cos(t);
                x[(1, i)] = h;
                x[(2, i)] = t * libm::sin(t);
                z[(0, i)] = t;
                z[(1, i)] = h;
            }
            (x, z)
        }
        SyntheticKind::SCurve => {
            let mut x = DMatrix::zeros(3, n);
            let mut z = DMatrix::zeros(2, n);
            for i in 0..n {
                let t = 3.0 * PI * (rng.random::<f64>() - 0.5);
                let h = 2.0 * rng.random::<f64>();
                x[(0, i)] = libm::sin(t);
                x[(1, i)] = h;
                x[(2, i)] = t.signum() * (libm::cos(t) - 1.0);
                z[(0, i)] = t;
                z[(1, i)] = h;
            }
            (x, z)
        }
        SyntheticKind::PlanePatch => {
            let mut x = DMatrix::zeros(3, n);
            let mut z = DMatrix::zeros(2, n);
            for i in 0..n {
                let u = 2.0 * rng.random::<f64>() - 1.0;
                let v = 2.0 * rng.random::<f64>() - 1.0;
                for r in 0..3 {
                    x[(r, i)] = PLANE_ORIGIN[r] + u * PLANE_AXIS_U[r] + v * PLANE_AXIS_V[r];
                }
                z[(0, i)] = u;
                z[(1, i)] = v;
            }
            (x, z)
        }
        SyntheticKind::Grid2d => {
            let side = ceil_sqrt(n);
            let x = DMatrix::from_fn(2, n, |r, i| {
                if r == 0 {
                    (i % side) as f64
                } else {
                    (i / side) as f64
                }
            });
            (x.clone(), x)
        }
    };
    let ds = Dataset::new(samples, Some(labels), kind.as_str())?.with_seed(seed);
    if ambient_noise > 0.0 {
        let noisy = add_noise(&ds, &NoiseSpec::new(ambient_noise, seed ^ NOISE_STREAM)?);
        return Ok(noisy.with_seed(seed));
    }
    Ok(ds)
}

const NOISE_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

fn ceil_sqrt(n: usize) -> usize {
    let mut s = libm::sqrt(n as f64) as usize;
    while s * s < n {
        s += 1;
    }
    while s > 1 && (s - 1) * (s - 1) >= n {
        s -= 1;
    }
    s
}

/// Per-entry Gaussian noise: variance `σ²` and a seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub variance: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(variance: f64, seed: u64) -> Result<Self> {
        if !(variance >= 0.0) || !variance.is_finite() {
            return Err(invalid(format!(
                "noise variance must be finite and >= 0, got {variance}"
            )));
        }
        Ok(NoiseSpec { variance, seed })
    }
}

/// `samples + G`, `G` i.i.d. `N(0, σ²)`; labels untouched.
pub fn add_noise(ds: &Dataset, spec: &NoiseSpec) -> Dataset {
    if spec.variance == 0.0 {
        return ds.clone();
    }
    let sigma = libm::sqrt(spec.variance);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = ds.clone();
    for v in out.samples.iter_mut() {
        let g: f64 = StandardNormal.sample(&mut rng);
        *v += sigma * g;
    }
    out.name = format!("{}+noise", ds.name);
    out
}

/// Principal axes of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// `k × D`, orthonormal rows in decreasing-variance order.
    pub components: DMatrix<f64>,
    pub variances: DVector<f64>,
}

impl PcaModel {
    pub fn fit(samples: &DMatrix<f64>, target_dim: usize) -> Result<Self> {
        let (dim, n) = samples.shape();
        if target_dim == 0 || target_dim > dim.min(n) {
            return Err(invalid(format!(
                "PCA target dimension {target_dim} must lie in [1, min(D, N)] = [1, {}]",
                dim.min(n)
            )));
        }
        let mean = samples.column_mean();
        let centered = center(samples, &mean);
        let cov = &centered * centered.transpose() / n as f64;
        let cov = (&cov + cov.transpose()) * 0.5;
        let (values, vectors) = symmetric_eigen_ascending(&cov)?;
        let mut components = DMatrix::zeros(target_dim, dim);
        let mut variances = DVector::zeros(target_dim);
        for k in 0..target_dim {
            let src = dim - 1 - k;
            components
                .row_mut(k)
                .copy_from(&vectors.column(src).transpose());
            variances[k] = values[src].max(0.0);
        }
        Ok(PcaModel {
            mean,
            components,
            variances,
        })
    }

    pub fn transform(&self, samples: &DMatrix<f64>) -> DMatrix<f64> {
        &self.components * center(samples, &self.mean)
    }
}

fn center(samples: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut c = samples.clone();
    for mut col in c.column_iter_mut() {
        col -= mean;
    }
    c
}

/// Project onto the top `target_dim` principal directions; labels carried.
pub fn pca(ds: &Dataset, target_dim: usize) -> Result<Dataset> {
    let model = PcaModel::fit(&ds.samples, target_dim)?;
    let mut out = Dataset::new(
        model.transform(&ds.samples),
        ds.labels.clone(),
        format!("{}-pca{}", ds.name, target_dim),
    )?;
    out.seed = ds.seed;
    Ok(out)
}

impl core::fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}
