//! Repeated-trial regression benchmark: every trial draws a dataset, builds
//! one graph and one alignment, and runs every (selector, L) cell on them so
//! that method comparisons are paired.
//!
//! Seeds: trial seeds are drawn in order from `master_seed`; each trial seed
//! splits into a data seed, a noise seed and a selector seed, and every
//! cell's selector seed comes from its own stream of the latter. GCLS and
//! MinCond ignore seeds, so their selections depend only on the trial data.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gcls_core::{
    add_noise, build_alignment, confidence_interval, error_bound, generate_synthetic, knn_graph,
    ls_learn, regularize_alignment, relative_error, select, spec_learn, AlignmentMethod,
    AlignmentParams, Dataset, NoiseSpec, SelectionInputs, SelectorKind, SyntheticKind,
};
use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{load_dataset, FormatError};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report serialization: {0}")]
    Serialize(String),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DatasetSpec {
    /// A fresh draw per trial.
    Synthetic { kind: SyntheticKind, n: usize },
    /// The same labeled samples in every trial (only noise varies).
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Ls,
    Spec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    pub kind: LearnerKind,
    /// LS: extra ridge on `Ψ` (default 0). Spec: label weight (default 1).
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Spec embedding dimension.
    #[serde(default = "default_learner_d")]
    pub d: usize,
    /// Learn on a different alignment than the one used for selection.
    #[serde(default)]
    pub alignment: Option<AlignmentMethod>,
}

fn default_learner_d() -> usize {
    2
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            kind: LearnerKind::Ls,
            gamma: None,
            d: default_learner_d(),
            alignment: None,
        }
    }
}

impl LearnerConfig {
    pub fn gamma(&self) -> f64 {
        self.gamma.unwrap_or(match self.kind {
            LearnerKind::Ls => 0.0,
            LearnerKind::Spec => 1.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Per-coordinate variance of the Gaussian noise added to the samples.
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_alignment")]
    pub alignment: AlignmentMethod,
    #[serde(default)]
    pub alignment_params: AlignmentParams,
    /// Positivity margin for `Ψ = Φ + αI`; defaults to `1e-8·max|φ_ii|`.
    #[serde(default)]
    pub tau: Option<f64>,
    pub methods: Vec<SelectorKind>,
    pub landmark_counts: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub learner: LearnerConfig,
    #[serde(default)]
    pub master_seed: u64,
    /// Wall-clock selector timing. Off makes reports byte-reproducible.
    #[serde(default = "default_true")]
    pub measure_runtime: bool,
}

fn default_k() -> usize {
    10
}

fn default_alignment() -> AlignmentMethod {
    AlignmentMethod::Le
}

fn default_trials() -> usize {
    1
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.into(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Checks that do not need the data; `n` checks run once `N` is known.
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::InvalidConfig(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.landmark_counts.is_empty() {
            return bad("landmark_counts must not be empty".into());
        }
        if self.landmark_counts.contains(&0) {
            return bad("landmark counts must be positive".into());
        }
        if let Some(noise) = &self.noise {
            if !noise.variance.is_finite() || noise.variance < 0.0 {
                return bad(format!(
                    "noise variance must be finite and >= 0, got {}",
                    noise.variance
                ));
            }
        }
        if let Some(tau) = self.tau {
            if !tau.is_finite() || tau < 0.0 {
                return bad(format!("tau must be finite and >= 0, got {tau}"));
            }
        }
        if let DatasetSpec::Synthetic { n, .. } = self.dataset {
            self.validate_n(n)?;
        }
        Ok(())
    }

    fn validate_n(&self, n: usize) -> Result<(), BenchError> {
        if let Some(&l) = self.landmark_counts.iter().find(|&&l| l >= n) {
            return Err(BenchError::InvalidConfig(format!(
                "landmark count {l} must be below N = {n}"
            )));
        }
        if self.k == 0 || self.k >= n {
            return Err(BenchError::InvalidConfig(format!(
                "k = {} must lie in [1, N-1] for N = {n}",
                self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: SelectorKind,
    #[serde(rename = "L")]
    pub l: usize,
    /// Relative error in percent per trial; `null` where the trial failed.
    #[serde(with = "gcls_core::nonfinite::vec_option")]
    pub errors: Vec<Option<f64>>,
    /// Selector seconds per trial; `null` if failed or not measured.
    #[serde(with = "gcls_core::nonfinite::vec_option")]
    pub runtimes: Vec<Option<f64>>,
    /// Learning-error bound on `Ψ` per trial.
    #[serde(with = "gcls_core::nonfinite::vec_option")]
    pub bounds: Vec<Option<f64>>,
    #[serde(with = "gcls_core::nonfinite::option")]
    pub mean_error: Option<f64>,
    /// 95% half-width of the error.
    #[serde(with = "gcls_core::nonfinite::option")]
    pub ci: Option<f64>,
    #[serde(with = "gcls_core::nonfinite::option")]
    pub mean_runtime: Option<f64>,
    #[serde(with = "gcls_core::nonfinite::option")]
    pub mean_bound: Option<f64>,
    /// `ok`, `partial` or `failed`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn row(&self, method: SelectorKind, l: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method && r.l == l)
    }

    pub fn to_json(&self) -> Result<String, BenchError> {
        serde_json::to_string_pretty(self).map_err(|e| BenchError::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Serialize(e.to_string()))
    }

    pub fn to_csv(&self) -> Result<String, BenchError> {
        let ser = |e: csv::Error| BenchError::Serialize(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "method",
            "L",
            "mean_error",
            "ci",
            "mean_runtime",
            "mean_bound",
            "status",
        ])
        .map_err(ser)?;
        let cell = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        for r in &self.rows {
            w.write_record([
                r.method.as_str().to_string(),
                r.l.to_string(),
                cell(r.mean_error),
                cell(r.ci),
                cell(r.mean_runtime),
                cell(r.mean_bound),
                r.status.clone(),
            ])
            .map_err(ser)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| BenchError::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| BenchError::Serialize(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    path: &Path,
) -> Result<(), BenchError> {
    let text = match format {
        ReportFormat::Json => report.to_json()? + "\n",
        ReportFormat::Csv => report.to_csv()?,
    };
    fs::File::create(path)
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(|source| BenchError::Io {
            path: path.into(),
            source,
        })
}

/// The seeds of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub data: u64,
    pub noise: u64,
    pub selectors: u64,
}

impl TrialSeeds {
    pub fn derive(trial_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        TrialSeeds {
            data: rng.random(),
            noise: rng.random(),
            selectors: rng.random(),
        }
    }

    /// Seed of the selector in grid cell `cell` (row-major over methods × L).
    pub fn cell(&self, cell: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.selectors);
        rng.set_stream(cell as u64);
        rng.random()
    }
}

pub fn trial_seeds(master_seed: u64, trials: usize) -> Vec<TrialSeeds> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    (0..trials)
        .map(|_| TrialSeeds::derive(rng.random()))
        .collect()
}

/// Clean dataset of one trial: a fresh synthetic draw, or the shared file
/// dataset.
pub fn trial_dataset(
    cfg: &ExperimentConfig,
    seeds: &TrialSeeds,
    file: Option<&Dataset>,
) -> Result<Dataset, String> {
    match (&cfg.dataset, file) {
        (DatasetSpec::Synthetic { kind, n }, _) => {
            generate_synthetic(*kind, *n, seeds.data, 0.0).map_err(|e| e.to_string())
        }
        (DatasetSpec::File { .. }, Some(ds)) => Ok(ds.clone()),
        (DatasetSpec::File { path }, None) => Err(format!("dataset {} not loaded", path.display())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct CellValues {
    error: f64,
    runtime: Option<f64>,
    bound: f64,
}

type CellOutcome = Result<CellValues, String>;

fn run_trial(
    cfg: &ExperimentConfig,
    t: usize,
    seeds: &TrialSeeds,
    file: Option<&Dataset>,
) -> Vec<CellOutcome> {
    let cells = cfg.methods.len() * cfg.landmark_counts.len();
    match prepare_and_run(cfg, t, seeds, file) {
        Ok(out) => out,
        Err(msg) => vec![Err(msg); cells],
    }
}

fn prepare_and_run(
    cfg: &ExperimentConfig,
    t: usize,
    seeds: &TrialSeeds,
    file: Option<&Dataset>,
) -> Result<Vec<CellOutcome>, String> {
    let clean = trial_dataset(cfg, seeds, file)?;
    let truth = clean.labels().cloned().ok_or("dataset has no labels")?;
    let input = match &cfg.noise {
        Some(nc) if nc.variance > 0.0 => add_noise(
            &clean,
            &NoiseSpec::new(nc.variance, seeds.noise).map_err(|e| e.to_string())?,
        ),
        _ => clean,
    };
    let stage = |what: &str, e: gcls_core::Error| format!("{what}: {e}");
    let graph = knn_graph(&input, cfg.k).map_err(|e| stage("graph", e))?;
    if !graph.is_connected() {
        warn!(
            "trial {t}: K-NN graph has {} components",
            graph.connected_components().count
        );
    }
    let align = build_alignment(&input, &graph, cfg.alignment, &cfg.alignment_params)
        .map_err(|e| stage("alignment", e))?;
    let tau = cfg.tau.unwrap_or_else(|| align.default_margin());
    let reg = regularize_alignment(&align, tau).map_err(|e| stage("regularization", e))?;
    let learn_reg = match cfg.learner.alignment {
        Some(m) if m != cfg.alignment => {
            let a = build_alignment(&input, &graph, m, &cfg.alignment_params)
                .map_err(|e| stage("learner alignment", e))?;
            let tau = cfg.tau.unwrap_or_else(|| a.default_margin());
            regularize_alignment(&a, tau).map_err(|e| stage("learner regularization", e))?
        }
        _ => reg.clone(),
    };
    let inputs = SelectionInputs {
        dataset: &input,
        graph: &graph,
        alignment: &reg,
    };

    let mut out = Vec::with_capacity(cfg.methods.len() * cfg.landmark_counts.len());
    for (mi, &method) in cfg.methods.iter().enumerate() {
        for (li, &l) in cfg.landmark_counts.iter().enumerate() {
            let cell = mi * cfg.landmark_counts.len() + li;
            let seed = seeds.cell(cell);
            let outcome = run_cell(cfg, &inputs, &learn_reg, &truth, method, l, seed);
            if let Err(msg) = &outcome {
                warn!("trial {t}, {method} L={l}: {msg}");
            }
            out.push(outcome);
        }
    }
    Ok(out)
}

fn run_cell(
    cfg: &ExperimentConfig,
    inputs: &SelectionInputs<'_>,
    learn_reg: &gcls_core::RegularizedAlignment,
    truth: &nalgebra::DMatrix<f64>,
    method: SelectorKind,
    l: usize,
    seed: u64,
) -> CellOutcome {
    let start = Instant::now();
    let sel = select(method, inputs, l, seed).map_err(|e| format!("selection: {e}"))?;
    let elapsed = start.elapsed().as_secs_f64();
    let runtime = cfg.measure_runtime.then(|| (elapsed * 1e6).round() / 1e6);

    let landmarks = &sel.landmarks;
    let z_l = nalgebra::DMatrix::from_fn(truth.nrows(), landmarks.len(), |r, c| {
        truth[(r, landmarks[c])]
    });
    let learned = match cfg.learner.kind {
        LearnerKind::Ls => ls_learn(learn_reg.matrix(), &z_l, landmarks, cfg.learner.gamma()),
        LearnerKind::Spec => spec_learn(
            learn_reg.source().matrix(),
            &z_l,
            landmarks,
            cfg.learner.gamma(),
            cfg.learner.d,
        ),
    }
    .map_err(|e| format!("learner: {e}"))?;
    let rest = learned.predicted_indices();
    let z_u = nalgebra::DMatrix::from_fn(truth.nrows(), rest.len(), |r, c| truth[(r, rest[c])]);
    let error = relative_error(learned.predicted_values(), &z_u)
        .map_err(|e| format!("error metric: {e}"))?;
    let bound =
        error_bound(inputs.alignment.matrix(), landmarks).map_err(|e| format!("bound: {e}"))?;
    Ok(CellValues {
        error,
        runtime,
        bound,
    })
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn assemble(cfg: &ExperimentConfig, per_trial: &[Vec<CellOutcome>]) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for (mi, &method) in cfg.methods.iter().enumerate() {
        for (li, &l) in cfg.landmark_counts.iter().enumerate() {
            let cell = mi * cfg.landmark_counts.len() + li;
            let outcomes: Vec<&CellOutcome> = per_trial.iter().map(|t| &t[cell]).collect();
            let ok: Vec<&CellValues> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
            let failures: Vec<CellFailure> = outcomes
                .iter()
                .enumerate()
                .filter_map(|(trial, o)| {
                    o.as_ref().err().map(|m| CellFailure {
                        trial,
                        message: m.clone(),
                    })
                })
                .collect();
            let errs: Vec<f64> = ok.iter().map(|v| v.error).collect();
            let times: Vec<f64> = ok.iter().filter_map(|v| v.runtime).collect();
            let bounds: Vec<f64> = ok.iter().map(|v| v.bound).collect();
            let ci = confidence_interval(&errs).ok();
            let status = match (ok.len(), failures.len()) {
                (_, 0) => "ok",
                (0, _) => "failed",
                _ => "partial",
            };
            rows.push(ReportRow {
                method,
                l,
                errors: outcomes
                    .iter()
                    .map(|o| o.as_ref().ok().map(|v| v.error))
                    .collect(),
                runtimes: outcomes
                    .iter()
                    .map(|o| o.as_ref().ok().and_then(|v| v.runtime))
                    .collect(),
                bounds: outcomes
                    .iter()
                    .map(|o| o.as_ref().ok().map(|v| v.bound))
                    .collect(),
                mean_error: ci.map(|c| c.0),
                ci: ci.map(|c| c.1),
                mean_runtime: mean(&times),
                mean_bound: mean(&bounds),
                status: status.to_string(),
                failures,
            });
        }
    }
    rows
}

/// Run every trial sequentially.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, BenchError> {
    run_experiment_with_jobs(cfg, 1)
}

/// Run trials on `jobs` threads; cells within a trial stay sequential and the
/// report is merged in trial order, so the output does not depend on `jobs`
/// (apart from measured runtimes).
pub fn run_experiment_with_jobs(
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<ExperimentReport, BenchError> {
    cfg.validate()?;
    let file = match &cfg.dataset {
        DatasetSpec::File { path } => {
            let ds = load_dataset(path)?;
            if ds.labels().is_none() {
                return Err(BenchError::InvalidConfig(format!(
                    "{} has no label columns",
                    path.display()
                )));
            }
            cfg.validate_n(ds.len())?;
            Some(ds)
        }
        DatasetSpec::Synthetic { .. } => None,
    };
    let seeds = trial_seeds(cfg.master_seed, cfg.trials);
    let run = |(t, s): (usize, &TrialSeeds)| {
        info!("trial {}/{}", t + 1, cfg.trials);
        run_trial(cfg, t, s, file.as_ref())
    };
    let per_trial: Vec<Vec<CellOutcome>> = if jobs <= 1 {
        seeds.iter().enumerate().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        pool.install(|| seeds.par_iter().enumerate().map(run).collect())
    };
    Ok(ExperimentReport {
        config: cfg.clone(),
        rows: assemble(cfg, &per_trial),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"dataset":{"source":"synthetic","kind":"swiss_roll","n":80},
                "k":8,"methods":["gcls","random"],"landmark_counts":[10,20,30],
                "trials":3,"master_seed":5,"measure_runtime":false}"#,
        )
        .unwrap()
    }

    #[test]
    fn config_defaults() {
        let cfg = small();
        assert_eq!(cfg.alignment, AlignmentMethod::Le);
        assert_eq!(cfg.learner.kind, LearnerKind::Ls);
        assert_eq!(cfg.learner.gamma(), 0.0);
        assert!(ExperimentConfig::from_json(r#"{"dataset":{"source":"synthetic","kind":"swiss_roll","n":8},"methods":["gcls"],"landmark_counts":[2],"bogus":1}"#).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = small();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small();
        cfg.landmark_counts = vec![80];
        assert!(cfg.validate().is_err());
        let mut cfg = small();
        cfg.methods.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn report_shape_and_determinism() {
        let cfg = small();
        let a = run_experiment(&cfg).unwrap();
        assert_eq!(a.rows.len(), 6);
        assert!(a
            .rows
            .iter()
            .all(|r| r.errors.len() == 3 && r.status == "ok"));
        assert!(a.rows.iter().all(|r| r.ci.unwrap() >= 0.0));
        let b = run_experiment_with_jobs(&cfg, 3).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(
            ExperimentReport::from_json(&a.to_json().unwrap()).unwrap(),
            a
        );
        assert_eq!(a.to_csv().unwrap().lines().count(), 7);
    }

    #[test]
    fn seeds_are_distinct_per_cell() {
        let s = TrialSeeds::derive(1);
        assert_ne!(s.cell(0), s.cell(1));
        assert_eq!(trial_seeds(3, 4), trial_seeds(3, 4));
        assert_ne!(trial_seeds(3, 1), trial_seeds(4, 1));
    }

    #[test]
    fn failing_cells_are_reported() {
        let mut cfg = small();
        cfg.learner = LearnerConfig {
            kind: LearnerKind::Spec,
            gamma: None,
            d: 2,
            alignment: None,
        };
        cfg.landmark_counts = vec![2, 10];
        let r = run_experiment(&cfg).unwrap();
        let bad = r.row(SelectorKind::Gcls, 2).unwrap();
        assert_eq!(bad.status, "failed");
        assert!(bad.errors.iter().all(Option::is_none));
        assert_eq!(bad.failures.len(), 3);
        assert!(bad.mean_error.is_none());
        assert_eq!(r.row(SelectorKind::Gcls, 10).unwrap().status, "ok");
        let json = r.to_json().unwrap();
        assert!(json.contains("\"failed\""));
    }
}
