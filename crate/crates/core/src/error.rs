use thiserror::Error;

use crate::barycenter::MeanResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not positive semi-definite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("kernel condition violated{}: the source kernel is not contained in the target kernel", fmt_location(*.index, *.iteration))]
    KernelCondition {
        /// Family member that failed, when the check ran over a family.
        index: Option<usize>,
        /// Solver iteration at which the failure surfaced.
        iteration: Option<usize>,
    },

    #[error("retraction leaves the PSD cone: smallest eigenvalue of I + A is {min_eigenvalue:e}{}", fmt_interval(*.admissible))]
    LeavesCone {
        min_eigenvalue: f64,
        /// Admissible step interval along a direction, when one was requested.
        admissible: Option<(f64, f64)>,
    },

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("empty family")]
    EmptyFamily,

    #[error("no convergence after {} iterations", .best.iterations)]
    MaxIterExceeded { best: Box<MeanResult> },

    #[error("degenerate construction: {0}")]
    Degenerate(String),
}

fn fmt_location(index: Option<usize>, iteration: Option<usize>) -> String {
    match (index, iteration) {
        (Some(i), Some(k)) => format!(" for member {i} at iteration {k}"),
        (Some(i), None) => format!(" for member {i}"),
        (None, Some(k)) => format!(" at iteration {k}"),
        (None, None) => String::new(),
    }
}

fn fmt_interval(admissible: Option<(f64, f64)>) -> String {
    match admissible {
        Some((lo, hi)) => format!(" (admissible step interval [{lo}, {hi}])"),
        None => String::new(),
    }
}

impl Error {
    /// Attaches a family index to a kernel-condition error.
    pub(crate) fn at_member(self, i: usize) -> Self {
        match self {
            Error::KernelCondition { iteration, .. } => Error::KernelCondition {
                index: Some(i),
                iteration,
            },
            other => other,
        }
    }

    pub(crate) fn at_iteration(self, k: usize) -> Self {
        match self {
            Error::KernelCondition { index, .. } => Error::KernelCondition {
                index,
                iteration: Some(k),
            },
            other => other,
        }
    }
}
