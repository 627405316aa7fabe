//! Landmark selectors behind one contract: every selector returns `L`
//! distinct indices in selection order, plus an optional per-round trace of
//! its objective.
//!
//! | selector        | input                | randomized |
//! |-----------------|----------------------|------------|
//! | GCLS            | `Ψ`                  | no         |
//! | MinCond         | `Ψ`                  | no         |
//! | MaxMinGeo       | K-NN graph           | first pick |
//! | ApproxDPP       | samples              | yes        |
//! | Random          | -                    | yes        |
//! | Nyström column  | `Φ`                  | yes        |
//! | K-means         | samples              | init       |

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::{AlignmentMatrix, RegularizedAlignment};
use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::graph::NeighborGraph;
use crate::linalg::sq_dist;
use crate::matrix::SparseSymMatrix;
use crate::spectral::{
    gershgorin_circles, q_from_extrema, surrogate_q, sym_matrix_log, GershgorinState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SelectorKind {
    #[serde(rename = "gcls")]
    Gcls,
    /// GCLS with neighbor residuals updated during candidate evaluation.
    #[serde(rename = "gcls_exact")]
    GclsExact,
    #[serde(rename = "mincond")]
    MinCond,
    #[serde(rename = "maxmingeo")]
    MaxMinGeo,
    #[serde(rename = "approxdpp")]
    ApproxDpp,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "nystrom_column")]
    NystromColumn,
    #[serde(rename = "kmeans")]
    Kmeans,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 8] = [
        SelectorKind::Gcls,
        SelectorKind::GclsExact,
        SelectorKind::MinCond,
        SelectorKind::MaxMinGeo,
        SelectorKind::ApproxDpp,
        SelectorKind::Random,
        SelectorKind::NystromColumn,
        SelectorKind::Kmeans,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKind::Gcls => "gcls",
            SelectorKind::GclsExact => "gcls_exact",
            SelectorKind::MinCond => "mincond",
            SelectorKind::MaxMinGeo => "maxmingeo",
            SelectorKind::ApproxDpp => "approxdpp",
            SelectorKind::Random => "random",
            SelectorKind::NystromColumn => "nystrom_column",
            SelectorKind::Kmeans => "kmeans",
        }
    }

    /// Whether the output depends on the seed.
    pub fn is_randomized(self) -> bool {
        !matches!(
            self,
            SelectorKind::Gcls | SelectorKind::GclsExact | SelectorKind::MinCond
        )
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SelectorKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = SelectorKind::ALL.iter().map(|k| k.as_str()).collect();
                invalid(format!(
                    "unknown selector '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Random,
    NystromColumn,
    Kmeans,
}

impl From<BaselineKind> for SelectorKind {
    fn from(k: BaselineKind) -> Self {
        match k {
            BaselineKind::Random => SelectorKind::Random,
            BaselineKind::NystromColumn => SelectorKind::NystromColumn,
            BaselineKind::Kmeans => SelectorKind::Kmeans,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: SelectorKind,
    /// Seed used by randomized selectors; 0 for deterministic ones.
    pub seed: u64,
    /// Selection order.
    pub landmarks: Vec<usize>,
    /// Objective value after each round, when the selector has one.
    #[serde(default, with = "crate::nonfinite::option_vec")]
    pub trace: Option<Vec<f64>>,
}

/// Everything any selector may need; built once per dataset and shared.
#[derive(Debug, Clone, Copy)]
pub struct SelectionInputs<'a> {
    pub dataset: &'a Dataset,
    pub graph: &'a NeighborGraph,
    pub alignment: &'a RegularizedAlignment,
}

/// Run the selector `kind` for `l` landmarks.
pub fn select(
    kind: SelectorKind,
    inputs: &SelectionInputs<'_>,
    l: usize,
    seed: u64,
) -> Result<SelectionResult> {
    match kind {
        SelectorKind::Gcls => gcls_select(inputs.alignment, l, false),
        SelectorKind::GclsExact => gcls_select(inputs.alignment, l, true),
        SelectorKind::MinCond => mincond_select(inputs.alignment, l),
        SelectorKind::MaxMinGeo => maxmingeo_select(inputs.graph, l, seed),
        SelectorKind::ApproxDpp => approxdpp_select(inputs.dataset, l, seed),
        SelectorKind::Random => baseline_select(
            BaselineKind::Random,
            inputs.dataset,
            inputs.alignment.source(),
            l,
            seed,
        ),
        SelectorKind::NystromColumn => baseline_select(
            BaselineKind::NystromColumn,
            inputs.dataset,
            inputs.alignment.source(),
            l,
            seed,
        ),
        SelectorKind::Kmeans => baseline_select(
            BaselineKind::Kmeans,
            inputs.dataset,
            inputs.alignment.source(),
            l,
            seed,
        ),
    }
}

fn check_count(l: usize, n: usize, allow_all: bool) -> Result<()> {
    let max = if allow_all { n } else { n.saturating_sub(1) };
    if l == 0 || l > max {
        let bound = if allow_all { "N" } else { "N-1" };
        return Err(invalid(format!(
            "landmark count must be in [1, {bound}] = [1, {max}], got {l}"
        )));
    }
    Ok(())
}

/// Largest and second largest value with the index of the largest.
#[derive(Clone, Copy)]
struct Top2 {
    best: f64,
    arg: usize,
    second: f64,
}

impl Top2 {
    fn new() -> Self {
        Top2 {
            best: f64::NEG_INFINITY,
            arg: usize::MAX,
            second: f64::NEG_INFINITY,
        }
    }

    fn push(&mut self, i: usize, v: f64) {
        if v > self.best {
            self.second = self.best;
            self.best = v;
            self.arg = i;
        } else if v > self.second {
            self.second = v;
        }
    }

    /// Maximum over everything pushed except index `i`.
    fn without(&self, i: usize) -> f64 {
        if i == self.arg {
            self.second
        } else {
            self.best
        }
    }
}

/// A candidate's post-removal objective: `Q` first, then (for infinite `Q`)
/// the larger `min(c−s)` wins, then the lower index.
#[derive(Clone, Copy)]
struct Candidate {
    idx: usize,
    q: f64,
    min_cs: f64,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        match (self.q.is_finite(), other.q.is_finite()) {
            (true, true) => self.q < other.q || (self.q == other.q && self.idx < other.idx),
            (true, false) => true,
            (false, true) => false,
            (false, false) => {
                self.min_cs > other.min_cs || (self.min_cs == other.min_cs && self.idx < other.idx)
            }
        }
    }
}

/// GCLS: greedily move to the landmarks the circle whose removal minimizes
/// the surrogate `Q` of the remaining unlabeled set.
///
/// By default a candidate is scored with the other residual radii left as
/// they are (O(N) per round). With `exact_eval` the candidate's neighbors
/// also lose their coupling to it before scoring, which is the exact `Q` of
/// the reduced set at O(N log N + N·K) per round.
///
/// The trace holds `Q` of the unlabeled set after each round.
pub fn gcls_select(
    reg: &RegularizedAlignment,
    l: usize,
    exact_eval: bool,
) -> Result<SelectionResult> {
    gcls_on_matrix(reg.matrix(), l, exact_eval)
}

pub(crate) fn gcls_on_matrix(
    psi: &SparseSymMatrix,
    l: usize,
    exact_eval: bool,
) -> Result<SelectionResult> {
    let n = psi.n();
    check_count(l, n, false)?;
    let mut state = GershgorinState::new(psi);
    let mut landmarks = Vec::with_capacity(l);
    let mut trace = Vec::with_capacity(l);
    let mut scratch = ExactScratch::new(n);
    for _ in 0..l {
        let pick = if exact_eval {
            best_candidate_exact(psi, &state, &mut scratch)
        } else {
            best_candidate_fast(&state)
        };
        state.remove(psi, pick)?;
        landmarks.push(pick);
        trace.push(surrogate_q(&state)?);
    }
    let method = if exact_eval {
        SelectorKind::GclsExact
    } else {
        SelectorKind::Gcls
    };
    Ok(SelectionResult {
        method,
        seed: 0,
        landmarks,
        trace: Some(trace),
    })
}

fn best_candidate_fast(state: &GershgorinState) -> usize {
    let (c, r, s) = (state.centers(), state.radii(), state.residual_radii());
    let unlabeled = state.unlabeled_indices();
    let mut rs = Top2::new();
    let mut cs_plus = Top2::new();
    let mut cs_minus = Top2::new(); // holds −(c−s) so the max is the min.
    for &i in &unlabeled {
        rs.push(i, r[i] - s[i]);
        cs_plus.push(i, c[i] + s[i]);
        cs_minus.push(i, -(c[i] - s[i]));
    }
    let mut best: Option<Candidate> = None;
    for &i in &unlabeled {
        let min_cs = -cs_minus.without(i);
        let cand = Candidate {
            idx: i,
            q: q_from_extrema(rs.without(i), cs_plus.without(i), min_cs),
            min_cs,
        };
        if best.as_ref().is_none_or(|b| cand.beats(b)) {
            best = Some(cand);
        }
    }
    best.expect("at least two unlabeled samples").idx
}

/// Per-round buffers for exact candidate evaluation.
struct ExactScratch {
    stamp: Vec<usize>,
    round: usize,
}

impl ExactScratch {
    fn new(n: usize) -> Self {
        ExactScratch {
            stamp: vec![0; n],
            round: 0,
        }
    }
}

/// First entry of `order` not stamped with `mark`, mapped through `f`.
fn first_unmarked(
    order: &[usize],
    stamp: &[usize],
    mark: usize,
    f: impl Fn(usize) -> f64,
) -> Option<f64> {
    order.iter().find(|&&j| stamp[j] != mark).map(|&j| f(j))
}

fn best_candidate_exact(
    psi: &SparseSymMatrix,
    state: &GershgorinState,
    scratch: &mut ExactScratch,
) -> usize {
    let (c, r, s) = (state.centers(), state.radii(), state.residual_radii());
    let unlabeled = state.unlabeled_indices();
    // Descending orders for max(r−s), max(c+s) and ascending for min(c−s).
    let mut by_rs = unlabeled.clone();
    by_rs.sort_by(|&a, &b| (r[b] - s[b]).total_cmp(&(r[a] - s[a])).then(a.cmp(&b)));
    let mut by_cp = unlabeled.clone();
    by_cp.sort_by(|&a, &b| (c[b] + s[b]).total_cmp(&(c[a] + s[a])).then(a.cmp(&b)));
    let mut by_cm = unlabeled.clone();
    by_cm.sort_by(|&a, &b| (c[a] - s[a]).total_cmp(&(c[b] - s[b])).then(a.cmp(&b)));

    let mut best: Option<Candidate> = None;
    for &i in &unlabeled {
        scratch.round += 1;
        let mark = scratch.round;
        scratch.stamp[i] = mark;
        let (mut max_rs, mut max_cp, mut min_cm) =
            (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::INFINITY);
        for &(j, v) in psi.row(i) {
            if j != i && state.is_unlabeled(j) {
                scratch.stamp[j] = mark;
                let sj = (s[j] - v.abs()).max(0.0);
                max_rs = max_rs.max(r[j] - sj);
                max_cp = max_cp.max(c[j] + sj);
                min_cm = min_cm.min(c[j] - sj);
            }
        }
        let stamp = &scratch.stamp;
        if let Some(v) = first_unmarked(&by_rs, stamp, mark, |j| r[j] - s[j]) {
            max_rs = max_rs.max(v);
        }
        if let Some(v) = first_unmarked(&by_cp, stamp, mark, |j| c[j] + s[j]) {
            max_cp = max_cp.max(v);
        }
        if let Some(v) = first_unmarked(&by_cm, stamp, mark, |j| c[j] - s[j]) {
            min_cm = min_cm.min(v);
        }
        let cand = Candidate {
            idx: i,
            q: q_from_extrema(max_rs, max_cp, min_cm),
            min_cs: min_cm,
        };
        if best.as_ref().is_none_or(|b| cand.beats(b)) {
            best = Some(cand);
        }
    }
    best.expect("at least two unlabeled samples").idx
}

pub const MINCOND_MAX_N: usize = 2000;
const MINCOND_DELTA: f64 = 0.05;

/// MinCond: each round, map the spectrum of `Ψ_ŪŪ` into `[δ, 2−δ]` using its
/// Gershgorin interval (only when it is not already there), take the matrix
/// logarithm, and delete the circle whose removal minimizes the width
/// `Λ_u − Λ_l` of the remaining log-circles.
///
/// The trace holds the chosen width per round.
pub fn mincond_select(reg: &RegularizedAlignment, l: usize) -> Result<SelectionResult> {
    mincond_on_matrix(reg.matrix(), l)
}

pub(crate) fn mincond_on_matrix(psi: &SparseSymMatrix, l: usize) -> Result<SelectionResult> {
    let n = psi.n();
    if n > MINCOND_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: MINCOND_MAX_N,
        });
    }
    check_count(l, n, false)?;
    let mut rest: Vec<usize> = (0..n).collect();
    let mut landmarks = Vec::with_capacity(l);
    let mut trace = Vec::with_capacity(l);
    for _ in 0..l {
        let sub = rescale_into_unit_band(psi.block(&rest, &rest))?;
        let log = sym_matrix_log(&sub)?;
        let (pos, width) = narrowest_deletion(&log);
        landmarks.push(rest.remove(pos));
        trace.push(width);
    }
    Ok(SelectionResult {
        method: SelectorKind::MinCond,
        seed: 0,
        landmarks,
        trace: Some(trace),
    })
}

fn rescale_into_unit_band(mut m: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let circles = gershgorin_circles(&m)?;
    let (lo, hi) = (circles.lower, circles.upper);
    let (target_lo, target_hi) = (MINCOND_DELTA, 2.0 - MINCOND_DELTA);
    if lo >= target_lo && hi <= target_hi {
        return Ok(m);
    }
    let n = m.nrows();
    let scale = if hi > lo {
        (target_hi - target_lo) / (hi - lo)
    } else {
        1.0
    };
    let offset = if hi > lo { target_lo } else { 1.0 };
    m *= scale;
    for i in 0..n {
        m[(i, i)] += offset - scale * lo;
    }
    Ok(m)
}

/// Position `p` minimizing `max_{q≠p}(ℓ_qq + R_q − |ℓ_qp|) − min_{q≠p}(ℓ_qq − R_q + |ℓ_qp|)`.
fn narrowest_deletion(log: &DMatrix<f64>) -> (usize, f64) {
    let m = log.nrows();
    let radius: Vec<f64> = (0..m)
        .map(|q| (0..m).filter(|&j| j != q).map(|j| log[(q, j)].abs()).sum())
        .collect();
    let mut best = (0usize, f64::INFINITY);
    for p in 0..m {
        let (mut upper, mut lower) = (f64::NEG_INFINITY, f64::INFINITY);
        for q in (0..m).filter(|&q| q != p) {
            let coupling = log[(q, p)].abs();
            upper = upper.max(log[(q, q)] + radius[q] - coupling);
            lower = lower.min(log[(q, q)] - radius[q] + coupling);
        }
        let width = (upper - lower).abs();
        if width < best.1 {
            best = (p, width);
        }
    }
    best
}

/// MaxMinGeo with the first landmark drawn uniformly from `seed`.
pub fn maxmingeo_select(g: &NeighborGraph, l: usize, seed: u64) -> Result<SelectionResult> {
    check_count(l, g.n(), true)?;
    let start = ChaCha8Rng::seed_from_u64(seed).random_range(0..g.n());
    let mut res = maxmingeo_select_with_start(g, l, start)?;
    res.seed = seed;
    Ok(res)
}

/// MaxMinGeo from a fixed first landmark: every later landmark maximizes its
/// geodesic distance to the nearest existing one (unreachable samples first,
/// ties to the lowest index). The trace holds that distance per round, `+inf`
/// for the first.
pub fn maxmingeo_select_with_start(
    g: &NeighborGraph,
    l: usize,
    start: usize,
) -> Result<SelectionResult> {
    let n = g.n();
    check_count(l, n, true)?;
    if start >= n {
        return Err(invalid(format!(
            "start index {start} out of range for {n} samples"
        )));
    }
    let mut is_landmark = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let mut landmarks = Vec::with_capacity(l);
    let mut trace = Vec::with_capacity(l);
    let mut pick = start;
    let mut pick_dist = f64::INFINITY;
    loop {
        is_landmark[pick] = true;
        landmarks.push(pick);
        trace.push(pick_dist);
        if landmarks.len() == l {
            break;
        }
        for (j, d) in g.shortest_paths(pick)?.into_iter().enumerate() {
            nearest[j] = nearest[j].min(d);
        }
        let mut best: Option<usize> = None;
        for j in (0..n).filter(|&j| !is_landmark[j]) {
            if best.is_none_or(|b| nearest[j] > nearest[b]) {
                best = Some(j);
            }
        }
        pick = best.expect("fewer landmarks than samples");
        pick_dist = nearest[pick];
    }
    Ok(SelectionResult {
        method: SelectorKind::MaxMinGeo,
        seed: 0,
        landmarks,
        trace: Some(trace),
    })
}

/// Draw an index from `weights`, or uniformly among `eligible` indices when
/// every weight is zero.
fn weighted_draw(rng: &mut ChaCha8Rng, weights: &[f64], eligible: impl Fn(usize) -> bool) -> usize {
    match WeightedIndex::new(weights) {
        Ok(dist) => dist.sample(rng),
        Err(_) => {
            let pool: Vec<usize> = (0..weights.len()).filter(|&i| eligible(i)).collect();
            pool[rng.random_range(0..pool.len())]
        }
    }
}

/// ApproxDPP with the first landmark drawn uniformly from `seed`.
pub fn approxdpp_select(ds: &Dataset, l: usize, seed: u64) -> Result<SelectionResult> {
    check_count(l, ds.len(), true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.random_range(0..ds.len());
    approxdpp_from(ds, l, start, seed, rng)
}

/// ApproxDPP from a fixed first landmark; later draws use the stream of
/// `seed`.
pub fn approxdpp_select_with_start(
    ds: &Dataset,
    l: usize,
    start: usize,
    seed: u64,
) -> Result<SelectionResult> {
    check_count(l, ds.len(), true)?;
    if start >= ds.len() {
        return Err(invalid(format!(
            "start index {start} out of range for {} samples",
            ds.len()
        )));
    }
    approxdpp_from(ds, l, start, seed, ChaCha8Rng::seed_from_u64(seed))
}

fn approxdpp_from(
    ds: &Dataset,
    l: usize,
    start: usize,
    seed: u64,
    mut rng: ChaCha8Rng,
) -> Result<SelectionResult> {
    let n = ds.len();
    let x = ds.samples();
    let two_d2 = 2.0 * (ds.dim() * ds.dim()) as f64;
    let mut weight = vec![1.0; n];
    let mut landmarks = Vec::with_capacity(l);
    let mut pick = start;
    loop {
        landmarks.push(pick);
        weight[pick] = 0.0;
        if landmarks.len() == l {
            break;
        }
        for (i, w) in weight.iter_mut().enumerate() {
            if *w > 0.0 {
                *w *= 1.0 - libm::exp(-sq_dist(x, i, pick) / two_d2);
            }
        }
        let taken = &landmarks;
        pick = weighted_draw(&mut rng, &weight, |i| !taken.contains(&i));
    }
    Ok(SelectionResult {
        method: SelectorKind::ApproxDpp,
        seed,
        landmarks,
        trace: None,
    })
}

/// Random, Nyström column-norm and K-means baselines. `a` is the unshifted
/// alignment matrix (used by the Nyström weights).
pub fn baseline_select(
    kind: BaselineKind,
    ds: &Dataset,
    a: &AlignmentMatrix,
    l: usize,
    seed: u64,
) -> Result<SelectionResult> {
    let n = ds.len();
    if a.n() != n {
        return Err(invalid(format!(
            "alignment has {} rows for {n} samples",
            a.n()
        )));
    }
    check_count(l, n, true)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let landmarks = match kind {
        BaselineKind::Random => rand::seq::index::sample(&mut rng, n, l).into_vec(),
        BaselineKind::NystromColumn => nystrom_column(a.matrix(), l, &mut rng),
        BaselineKind::Kmeans => kmeans_landmarks(ds.samples(), l, &mut rng),
    };
    Ok(SelectionResult {
        method: kind.into(),
        seed,
        landmarks,
        trace: None,
    })
}

fn nystrom_column(phi: &SparseSymMatrix, l: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut weight: Vec<f64> = (0..phi.n()).map(|j| phi.column_norm(j)).collect();
    let mut taken = vec![false; phi.n()];
    let mut out = Vec::with_capacity(l);
    for _ in 0..l {
        let pick = weighted_draw(rng, &weight, |i| !taken[i]);
        taken[pick] = true;
        weight[pick] = 0.0;
        out.push(pick);
    }
    out
}

pub const KMEANS_MAX_ITER: usize = 100;

/// Lloyd's algorithm with k-means++ seeding; returns, per cluster, the
/// nearest sample not already returned for an earlier cluster.
fn kmeans_landmarks(x: &DMatrix<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = x.ncols();
    let dist_to = |centers: &DMatrix<f64>, c: usize, i: usize| -> f64 {
        centers
            .column(c)
            .iter()
            .zip(x.column(i).iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };

    let mut centers = DMatrix::zeros(x.nrows(), k);
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    centers.set_column(0, &x.column(first));
    chosen[first] = true;
    let mut closest: Vec<f64> = (0..n).map(|i| dist_to(&centers, 0, i)).collect();
    for c in 1..k {
        let w: Vec<f64> = (0..n)
            .map(|i| if chosen[i] { 0.0 } else { closest[i] })
            .collect();
        let pick = weighted_draw(rng, &w, |i| !chosen[i]);
        chosen[pick] = true;
        centers.set_column(c, &x.column(pick));
        for (i, d) in closest.iter_mut().enumerate() {
            *d = d.min(dist_to(&centers, c, i));
        }
    }

    let mut assign = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        let mut dist = vec![0.0; n];
        for i in 0..n {
            let mut best = (0usize, f64::INFINITY);
            for c in 0..k {
                let d = dist_to(&centers, c, i);
                if d < best.1 {
                    best = (c, d);
                }
            }
            if assign[i] != best.0 {
                assign[i] = best.0;
                changed = true;
            }
            dist[i] = best.1;
        }
        let mut counts = vec![0usize; k];
        assign.iter().for_each(|&c| counts[c] += 1);
        // An empty cluster takes over the sample farthest from its center.
        for c in 0..k {
            if counts[c] != 0 {
                continue;
            }
            let far =
                (0..n)
                    .filter(|&i| counts[assign[i]] > 1)
                    .fold(None, |acc: Option<usize>, i| match acc {
                        Some(b) if dist[b] >= dist[i] => Some(b),
                        _ => Some(i),
                    });
            if let Some(i) = far {
                counts[assign[i]] -= 1;
                assign[i] = c;
                counts[c] = 1;
                dist[i] = 0.0;
                changed = true;
            }
        }
        let mut sums = DMatrix::zeros(x.nrows(), k);
        for (i, &c) in assign.iter().enumerate() {
            let mut col = sums.column_mut(c);
            col += x.column(i);
        }
        for c in (0..k).filter(|&c| counts[c] > 0) {
            centers.set_column(c, &(sums.column(c) / counts[c] as f64));
        }
        if !changed {
            break;
        }
    }

    let mut used = vec![false; n];
    let mut out = Vec::with_capacity(k);
    for c in 0..k {
        let mut best = (usize::MAX, f64::INFINITY);
        for i in (0..n).filter(|&i| !used[i]) {
            let d = dist_to(&centers, c, i);
            if d < best.1 {
                best = (i, d);
            }
        }
        used[best.0] = true;
        out.push(best.0);
    }
    out
}

/// Name list for error messages and help text.
pub fn selector_names() -> String {
    let names: Vec<&str> = SelectorKind::ALL.iter().map(|k| k.as_str()).collect();
    names.join(", ")
}
