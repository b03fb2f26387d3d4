use thiserror::Error;

use crate::regression::Model;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("model {model} has dimension {dim}, too large for n = {n}")]
    DimensionTooLarge { model: Model, dim: usize, n: usize },

    #[error("design restricted to model {model} is rank deficient (pivot ratio {ratio:.3e})")]
    RankDeficient { model: Model, ratio: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("covariance submatrix for model {0} is numerically singular")]
    SingularSubmatrix(Model),

    #[error("invalid ground truth: {0}")]
    InvalidTruth(String),

    #[error("invalid data set: {0}")]
    InvalidData(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid collection: {0}")]
    InvalidCollection(String),

    #[error("model {0} does not belong to the collection")]
    ModelNotInCollection(Model),

    #[error("collection is empty")]
    EmptyCollection,

    #[error("K must exceed 1, got {0}")]
    InvalidK(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coordinate descent did not converge after {sweeps} sweeps (last max change {last_change:.3e})")]
    NoConvergence {
        sweeps: usize,
        last_change: f64,
        last_iterate: Vec<f64>,
    },

    #[error("every adaptive weight is infinite (initial estimator is zero)")]
    AllWeightsInfinite,

    #[error("response has zero empirical variance")]
    DegenerateY,

    #[error("true coefficient vector has no nonzero entry")]
    NoTrueSignal,

    #[error("dimension {0} is not allowed: {1}")]
    BadDimension(usize, String),

    #[error("circulant matrices require odd p, got {0}")]
    EvenP(usize),

    #[error("matrix is not positive semi-definite (smallest eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("replication {rep}: {source}")]
    Replication {
        rep: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
