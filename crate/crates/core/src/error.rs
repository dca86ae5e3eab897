use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,

    #[error("vertex index {index} out of range for {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("edge ({u}, {v}) has invalid weight {weight}")]
    InvalidWeight { u: usize, v: usize, weight: f64 },

    #[error("vertex {0} is isolated; normalized Laplacians are undefined for zero degree")]
    IsolatedVertex(usize),

    #[error("power A^{k} needs {nnz} nonzeros, exceeding the budget of {budget}")]
    DensityBudget { k: usize, nnz: usize, budget: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("eigensolver did not converge after {iterations} iterations (max residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("graph has {0} connected components; a connected graph is required")]
    Disconnected(usize),

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("a cluster has zero volume")]
    ZeroVolume,

    #[error("loss mask selects no vertices")]
    EmptyMask,

    #[error("forward cache is stale: recorded generation {cached}, model is at {current}")]
    StaleCache { cached: u64, current: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: file is empty")]
    EmptyFile { path: PathBuf },

    #[error("unknown class label {label:?} at {path}:{line}")]
    UnknownClass {
        path: PathBuf,
        line: usize,
        label: String,
    },

    #[error("class {class} has {found} vertices, {required} are required for the training split")]
    ClassTooSmall {
        class: String,
        found: usize,
        required: usize,
    },

    #[error("non-finite loss at epoch {epoch}: {loss}")]
    NonFinite { epoch: usize, loss: f64 },

    #[error("only {succeeded} of {total} runs succeeded; at least 80% are required")]
    TooManyFailures { succeeded: usize, total: usize },

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag for each variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyGraph => "empty_graph",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::InvalidWeight { .. } => "invalid_weight",
            Error::IsolatedVertex(_) => "isolated_vertex",
            Error::DensityBudget { .. } => "density_budget",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotConverged { .. } => "not_converged",
            Error::Disconnected(_) => "disconnected",
            Error::EmptyCluster(_) => "empty_cluster",
            Error::ZeroVolume => "zero_volume",
            Error::EmptyMask => "empty_mask",
            Error::StaleCache { .. } => "stale_cache",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse { .. } => "parse",
            Error::EmptyFile { .. } => "empty_file",
            Error::UnknownClass { .. } => "unknown_class",
            Error::ClassTooSmall { .. } => "class_too_small",
            Error::NonFinite { .. } => "non_finite",
            Error::TooManyFailures { .. } => "too_many_failures",
            Error::Checkpoint(_) => "checkpoint",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
