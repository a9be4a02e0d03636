use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex index {index} out of range for a graph with {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("negative weight {weight} on entry ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("unsupported Matrix Market field `{0}`")]
    UnsupportedField(String),

    #[error("snapshot {index} has {found} vertices, expected {expected}")]
    InconsistentVertexCount {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("no snapshot files found in {0}")]
    EmptyDirectory(PathBuf),

    #[error("vertex {vertex} has zero out-degree{}", snapshot_suffix(*.snapshot))]
    DanglingVertex {
        vertex: usize,
        snapshot: Option<usize>,
    },

    #[error("vertex {vertex} receives no probability mass (nu = {value:e})")]
    SingularNu { vertex: usize, value: f64 },

    #[error("expected a {expected} matrix")]
    KindMismatch { expected: &'static str },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (max residual {max_residual:e})")]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
        max_residual: f64,
    },

    #[error("vertex {0} has zero degree")]
    ZeroDegree(usize),

    #[error("transition matrix is not similar to a symmetric matrix (max asymmetry {asymmetry:e})")]
    NotSymmetrizable { asymmetry: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("Tikhonov parameter must be positive, got {0}")]
    NonpositiveEpsilon(f64),

    #[error("cannot form {k} clusters from {n} points")]
    KTooLarge { k: usize, n: usize },

    #[error("at least two eigenvalues are required, got {0}")]
    TooFewEigenvalues(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cluster {0} has no members")]
    EmptyCluster(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

fn snapshot_suffix(snapshot: Option<usize>) -> String {
    match snapshot {
        Some(t) => format!(" in snapshot {t}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the filesystem rather than by the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::EmptyDirectory(_))
    }
}
