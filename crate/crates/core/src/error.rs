use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed document at line {line}, column {column}: {message}")]
    MalformedDocument { line: u32, column: u32, message: String },

    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },

    #[error("corpus is empty or too small: {0}")]
    EmptyCorpus(String),

    #[error("feature manifest mismatch: expected [{expected}], found [{found}]")]
    ManifestMismatch { expected: String, found: String },

    #[error("unknown feature name: {0}")]
    UnknownFeature(String),

    #[error("matrix has {rows} rows, at least {required} required")]
    TooFewRows { rows: usize, required: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteInput { row: usize, column: usize },

    #[error("silhouette needs at least two clusters, found {0}")]
    FewerThanTwoClusters(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Any other error, tagged with the input file it came from.
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedDocument { .. } => "malformed_document",
            Error::SchemaViolation { .. } => "schema_violation",
            Error::EmptyCorpus(_) => "empty_corpus",
            Error::ManifestMismatch { .. } => "manifest_mismatch",
            Error::UnknownFeature(_) => "unknown_feature",
            Error::TooFewRows { .. } => "too_few_rows",
            Error::NonFiniteInput { .. } => "non_finite_input",
            Error::FewerThanTwoClusters(_) => "fewer_than_two_clusters",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Io { .. } => "io",
            Error::InFile { source, .. } => source.kind(),
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SchemaViolation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
