use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidArgument(String),
    /// A NaN or infinite entry at (row, column) of the named matrix.
    NonFinite {
        what: &'static str,
        row: usize,
        col: usize,
    },
    NotSymmetric {
        row: usize,
        col: usize,
        diff: f64,
    },
    NotPositiveDefinite {
        min_eigenvalue: f64,
    },
    DisconnectedGraph {
        components: usize,
    },
    SingularLocalGram {
        node: usize,
    },
    RankDeficientPatch {
        node: usize,
        d: usize,
    },
    /// The LS system has no unique solution; `component` lists the nodes of
    /// one connected piece of the alignment pattern that contains no landmark.
    SingularSystem {
        component: Vec<usize>,
    },
    RankDeficientFit {
        landmarks: usize,
        required: usize,
    },
    TooLarge {
        n: usize,
        max: usize,
    },
    Numerical(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NonFinite { what, row, col } => {
                write!(f, "non-finite value in {what} at row {row}, column {col}")
            }
            Error::NotSymmetric { row, col, diff } => write!(
                f,
                "matrix is not symmetric: entries ({row},{col}) and ({col},{row}) differ by {diff:e}"
            ),
            Error::NotPositiveDefinite { min_eigenvalue } => write!(
                f,
                "matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})"
            ),
            Error::DisconnectedGraph { components } => write!(
                f,
                "neighbor graph is disconnected ({components} components); increase k"
            ),
            Error::SingularLocalGram { node } => write!(
                f,
                "local Gram matrix of node {node} is singular; use a positive lle_reg"
            ),
            Error::RankDeficientPatch { node, d } => write!(
                f,
                "local patch of node {node} has rank below the target dimension {d}"
            ),
            Error::SingularSystem { component } => {
                let shown: Vec<_> = component.iter().take(8).collect();
                write!(
                    f,
                    "singular label-propagation system: component of {} nodes {:?}{} has no landmark; \
                     add a landmark there or use gamma > 0",
                    component.len(),
                    shown,
                    if component.len() > 8 { " ..." } else { "" }
                )
            }
            Error::RankDeficientFit {
                landmarks,
                required,
            } => write!(
                f,
                "affine label fit is underdetermined with {landmarks} landmarks; at least {required} are needed"
            ),
            Error::TooLarge { n, max } => write!(
                f,
                "matrix of size {n} exceeds the limit {max} for this exhaustive/dense routine; use a smaller problem"
            ),
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
