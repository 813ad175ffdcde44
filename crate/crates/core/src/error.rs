use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("invalid language code {0:?} (expected three lowercase ASCII letters)")]
    InvalidLanguageCode(String),

    #[error("duplicate language code {0}")]
    DuplicateLanguage(String),

    #[error("the two views share no language")]
    NoCommonLanguages,

    #[error("zero-norm vector for language {0}")]
    DegenerateVector(String),

    #[error("view has no variance (all rows identical)")]
    DegenerateView,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("covariance matrix is singular; pass a positive ridge")]
    SingularCovariance,

    #[error("no canonical dimension reaches the retention cutoff {cutoff}; correlations: {correlations:?}")]
    NoCorrelatedDimensions { cutoff: f64, correlations: Vec<f64> },

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("invalid variance threshold {0} (must lie in [0.5, 1.0])")]
    InvalidThreshold(f64),

    #[error("invalid cluster count {k} (valid range {min}..={max})")]
    InvalidK { k: usize, min: usize, max: usize },

    #[error("newick parse error at byte {position}: {message}")]
    NewickParse { position: usize, message: String },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid sample size {size} (available languages: {available})")]
    InvalidSampleSize { size: usize, available: usize },

    #[error("unknown language {0}")]
    UnknownLanguage(String),

    #[error("missing metadata for language {0}")]
    MissingMetadata(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures that come from the numbers rather than from the input shape.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularCovariance | Error::DegenerateView | Error::Numerical(_)
        )
    }
}
