//! `gcls` command line: one subcommand per pipeline stage, each reading and
//! writing the formats of [`crate::io`].
//!
//! ```text
//! gcls gen    --kind swiss_roll --n 500 --seed 1 --out data.csv
//! gcls graph  --in data.csv --k 10 --out graph.txt
//! gcls align  --in data.csv --graph graph.txt --method le --out phi.txt
//! gcls select --align phi.txt --method gcls --L 50 --out sel.json
//! gcls learn  --align phi.txt --labels data.csv --landmarks sel.json --out pred.csv
//! gcls bound  --align phi.txt --landmarks sel.json
//! gcls bench  --config exp.json --out report.json
//! ```
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use gcls_core::{
    build_alignment, error_bound, generate_synthetic, knn_graph, ls_learn, regularize_alignment,
    select, spec_learn, surrogate_q, AlignmentMethod, AlignmentParams, Dataset, GershgorinState,
    LeWeighting, NeighborGraph, SelectionInputs, SelectorKind, SyntheticKind,
};
use log::info;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::bench::{
    emit_report, run_experiment_with_jobs, ExperimentConfig, LearnerKind, ReportFormat,
};
use crate::io;

pub const BENCH_SEED_ENV: &str = "BENCH_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "gcls",
    version,
    about = "Landmark selection and semi-supervised manifold learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a synthetic labeled dataset.
    Gen(GenArgs),
    /// Build the symmetrized K-NN graph of a dataset.
    Graph(GraphArgs),
    /// Build an alignment matrix on a graph.
    Align(AlignArgs),
    /// Select landmarks.
    Select(SelectArgs),
    /// Propagate landmark labels to the remaining samples.
    Learn(LearnArgs),
    /// Run a repeated-trial benchmark from a JSON config.
    Bench(BenchArgs),
    /// Print the learning-error bound and its Gershgorin surrogate Q.
    Bound(BoundArgs),
}

#[derive(Debug, Args, Serialize)]
struct GenArgs {
    #[arg(long)]
    kind: SyntheticKind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Variance of Gaussian noise added to the samples.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct GraphArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

fn parse_le_weighting(s: &str) -> Result<LeWeighting, String> {
    match s {
        "distance" => Ok(LeWeighting::Distance),
        "heat_kernel" => Ok(LeWeighting::HeatKernel),
        _ => Err(format!("expected distance or heat_kernel, got '{s}'")),
    }
}

#[derive(Debug, Args, Serialize)]
struct AlignArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    method: AlignmentMethod,
    /// Intrinsic dimension (LTSA, ISOMAP).
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1e-3)]
    lle_reg: f64,
    /// LE edge weights: distance or heat_kernel.
    #[arg(long, default_value = "distance", value_parser = parse_le_weighting)]
    le_weighting: LeWeighting,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SelectArgs {
    #[arg(long)]
    align: PathBuf,
    /// gcls, gcls_exact, mincond, maxmingeo, approxdpp, random, nystrom_column, kmeans.
    #[arg(long)]
    method: SelectorKind,
    /// Number of landmarks.
    #[arg(long = "L")]
    l: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Positivity margin of Ψ = Φ + αI (default 1e-8·max|φ_ii|).
    #[arg(long)]
    tau: Option<f64>,
    /// Dataset CSV (approxdpp, kmeans).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Graph dump (maxmingeo).
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct LearnArgs {
    #[arg(long)]
    align: PathBuf,
    /// Dataset CSV whose label columns hold the ground truth.
    #[arg(long)]
    labels: PathBuf,
    /// Selection JSON or plain index list.
    #[arg(long)]
    landmarks: PathBuf,
    #[arg(long, value_enum, default_value_t = LearnerKind::Ls)]
    learner: LearnerKind,
    /// LS ridge (default 0) or Spec label weight (default 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Spec embedding dimension.
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
    /// Worker threads for trials.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args, Serialize)]
struct BoundArgs {
    #[arg(long)]
    align: PathBuf,
    #[arg(long)]
    landmarks: PathBuf,
    /// Positivity margin added on top of the Gershgorin shift.
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
}

/// A flag combination clap cannot check on its own.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn echo<T: Serialize>(name: &str, args: &T) {
    info!(
        "{name}: {}",
        serde_json::to_string(args).unwrap_or_default()
    );
}

/// Parse `argv` (program name first) and run; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_output(argv, &mut std::io::stdout())
}

/// As [`run`], writing command output (not logs) to `out`.
pub fn run_with_output<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            1
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> anyhow::Result<()> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Graph(a) => graph(a),
        Command::Align(a) => align(a),
        Command::Select(a) => select_cmd(a),
        Command::Learn(a) => learn(a),
        Command::Bench(a) => bench(a),
        Command::Bound(a) => bound(a, out),
    }
}

fn gen(a: GenArgs) -> anyhow::Result<()> {
    echo("gen", &a);
    let ds = generate_synthetic(a.kind, a.n, a.seed, a.noise)?;
    io::save_dataset(&a.out, &ds)?;
    info!("wrote {} samples to {}", ds.len(), a.out.display());
    Ok(())
}

fn graph(a: GraphArgs) -> anyhow::Result<()> {
    echo("graph", &a);
    let ds = io::load_dataset(&a.input)?;
    let g = knn_graph(&ds, a.k)?;
    if !g.is_connected() {
        log::warn!(
            "graph has {} connected components",
            g.connected_components().count
        );
    }
    io::save_graph(&a.out, &g)?;
    info!("wrote {} edges to {}", g.num_edges(), a.out.display());
    Ok(())
}

fn align(a: AlignArgs) -> anyhow::Result<()> {
    echo("align", &a);
    let ds = io::load_dataset(&a.input)?;
    let g = io::load_graph(&a.graph)?;
    let params = AlignmentParams {
        d: a.d,
        lle_reg: a.lle_reg,
        le_weighting: a.le_weighting,
    };
    let phi = build_alignment(&ds, &g, a.method, &params)?;
    io::save_alignment(&a.out, &phi)?;
    info!(
        "wrote {}×{} alignment ({} nonzeros) to {}",
        phi.n(),
        phi.n(),
        phi.matrix().nnz(),
        a.out.display()
    );
    Ok(())
}

fn require<T>(v: Option<T>, flag: &str, method: SelectorKind) -> anyhow::Result<T> {
    v.ok_or_else(|| UsageError(format!("--method {method} requires --{flag}")).into())
}

fn select_cmd(a: SelectArgs) -> anyhow::Result<()> {
    echo("select", &a);
    let phi = io::load_alignment(&a.align)?;
    let n = phi.n();
    let tau = a.tau.unwrap_or_else(|| phi.default_margin());
    info!("tau = {tau:e}");
    let reg = regularize_alignment(&phi, tau)?;
    let ds = match (&a.data, a.method) {
        (Some(p), _) => io::load_dataset(p)?,
        (None, SelectorKind::ApproxDpp | SelectorKind::Kmeans) => {
            require(None::<Dataset>, "data", a.method)?
        }
        // Only N matters to these selectors.
        (None, _) => Dataset::new(DMatrix::zeros(1, n), None, "placeholder")?,
    };
    let g = match (&a.graph, a.method) {
        (Some(p), _) => io::load_graph(p)?,
        (None, SelectorKind::MaxMinGeo) => require(None::<NeighborGraph>, "graph", a.method)?,
        (None, _) => NeighborGraph::from_edges(n, &[], None)?,
    };
    if ds.len() != n || g.n() != n {
        bail!(
            "alignment has {n} rows but dataset/graph have {}/{} samples",
            ds.len(),
            g.n()
        );
    }
    let sel = select(
        a.method,
        &SelectionInputs {
            dataset: &ds,
            graph: &g,
            alignment: &reg,
        },
        a.l,
        a.seed,
    )?;
    io::save_selection(&a.out, &sel)?;
    info!(
        "wrote {} landmarks to {}",
        sel.landmarks.len(),
        a.out.display()
    );
    Ok(())
}

fn learn(a: LearnArgs) -> anyhow::Result<()> {
    echo("learn", &a);
    let phi = io::load_alignment(&a.align)?;
    let ds = io::load_dataset(&a.labels)?;
    let landmarks = io::load_landmarks(&a.landmarks)?;
    let Some(z_l) = ds.labels_at(
        &landmarks
            .iter()
            .copied()
            .filter(|&i| i < ds.len())
            .collect::<Vec<_>>(),
    ) else {
        bail!("{} has no label columns", a.labels.display());
    };
    if ds.len() != phi.n() {
        bail!(
            "alignment has {} rows but {} has {} samples",
            phi.n(),
            a.labels.display(),
            ds.len()
        );
    }
    let assignment = match a.learner {
        LearnerKind::Ls => ls_learn(phi.matrix(), &z_l, &landmarks, a.gamma.unwrap_or(0.0))?,
        LearnerKind::Spec => {
            spec_learn(phi.matrix(), &z_l, &landmarks, a.gamma.unwrap_or(1.0), a.d)?
        }
    };
    let out = Dataset::new(
        ds.samples().clone(),
        Some(assignment.full_labels()),
        ds.name(),
    )?;
    io::save_dataset(&a.out, &out)?;
    info!(
        "wrote predictions for {} samples to {}",
        assignment.predicted_indices().len(),
        a.out.display()
    );
    Ok(())
}

fn bench(a: BenchArgs) -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Ok(s) = std::env::var(BENCH_SEED_ENV) {
        cfg.master_seed = s.trim().parse().map_err(|_| {
            UsageError(format!("{BENCH_SEED_ENV}='{s}' is not an unsigned integer"))
        })?;
    }
    echo("bench", &a);
    info!(
        "resolved experiment config: {}",
        serde_json::to_string(&cfg)?
    );
    let report = run_experiment_with_jobs(&cfg, a.jobs)?;
    emit_report(&report, a.format, &a.out)?;
    for row in &report.rows {
        info!(
            "{:>14} L={:<5} error {:>8.3} ± {:<7.3} [{}]",
            row.method.as_str(),
            row.l,
            row.mean_error.unwrap_or(f64::NAN),
            row.ci.unwrap_or(f64::NAN),
            row.status
        );
    }
    Ok(())
}

fn bound(a: BoundArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    echo("bound", &a);
    let phi = io::load_alignment(&a.align)?;
    let landmarks = io::load_landmarks(&a.landmarks)?;
    let reg = regularize_alignment(&phi, a.tau)?;
    info!("alpha = {:e}", reg.alpha());
    let psi = reg.matrix();
    let value = error_bound(psi, &landmarks)?;
    let mut is_landmark = vec![false; psi.n()];
    landmarks.iter().for_each(|&l| is_landmark[l] = true);
    let rest: Vec<usize> = (0..psi.n()).filter(|&i| !is_landmark[i]).collect();
    let q = surrogate_q(&GershgorinState::with_unlabeled(psi, &rest)?)?;
    writeln!(out, "bound {value}").context("writing output")?;
    writeln!(out, "Q {q}").context("writing output")?;
    Ok(())
}
