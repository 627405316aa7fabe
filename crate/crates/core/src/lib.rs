//! Landmark selection for semi-supervised manifold learning.
//!
//! The crate builds alignment matrices (LE, LLE, LTSA, ISOMAP) on top of a
//! symmetrized K-NN graph, selects landmark subsets, and propagates labels
//! from the landmarks to the rest of the samples. The main selector, GCLS,
//! greedily deletes Gershgorin circles of the regularized alignment matrix
//! `Ψ = Φ + αI` so as to minimize a cheap upper bound `Q` on the
//! learning-error bound `κ(Ψ_ūū)·(1/‖Ψ_ūl‖ + 1/‖Ψ_ūū‖)`.
//!
//! Everything here is pure computation: no IO, no clocks, no threads. The
//! crate is `no_std` and only needs `alloc`; file formats, the benchmark
//! harness and the CLI live in the `gcls` crate.
//!
//! Pipeline:
//!
//! ```text
//! Dataset ──knn_graph──▶ NeighborGraph ──build_alignment──▶ AlignmentMatrix
//!                                                              │ regularize_alignment
//!                                                              ▼
//!          LabelAssignment ◀──ls_learn / spec_learn── RegularizedAlignment
//!                 ▲                                            │ gcls_select, ...
//!                 └──────────────── SelectionResult ◀──────────┘
//! ```
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod alignment;
pub mod data;
pub mod error;
pub mod graph;
pub mod landmark;
mod linalg;
pub mod matrix;
pub mod metrics;
pub mod nonfinite;
pub mod spectral;
pub mod ssml;

pub use alignment::{
    build_alignment, regularize_alignment, AlignmentMatrix, AlignmentMethod, AlignmentParams,
    LeWeighting, RegularizedAlignment,
};
pub use data::{add_noise, generate_synthetic, pca, Dataset, NoiseSpec, PcaModel, SyntheticKind};
pub use error::{Error, Result};
pub use graph::{knn_graph, Components, NeighborGraph};
pub use landmark::{
    approxdpp_select, baseline_select, gcls_select, maxmingeo_select, mincond_select, select,
    BaselineKind, SelectionInputs, SelectionResult, SelectorKind,
};
pub use linalg::{fix_sign, symmetric_eigen_ascending};
pub use matrix::SparseSymMatrix;
pub use metrics::{confidence_interval, relative_error};
pub use spectral::{
    block_l1_norms, brute_force_best_submatrix, condition_number, error_bound, gershgorin_circles,
    surrogate_q, sym_matrix_log, GershgorinCircles, GershgorinState,
};
pub use ssml::{embed, ls_learn, spec_learn, LabelAssignment};
