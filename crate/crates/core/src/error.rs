use std::path::PathBuf;

use crate::classifiers::params::ParamViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: file is empty", .0.display())]
    EmptyFile(PathBuf),

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("row {row} (line {line}), column '{column}': expected 0 or 1, found '{value}'")]
    NonBinaryCell {
        row: usize,
        line: usize,
        column: String,
        value: String,
    },

    #[error("duplicate symptom column '{0}'")]
    DuplicateColumn(String),

    #[error("row {row} (line {line}): expected {expected} fields, found {found}")]
    RowArity {
        row: usize,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown symptom(s): {}", .0.join(", "))]
    UnknownSymptoms(Vec<String>),

    #[error("class '{0}' has fewer than {1} samples")]
    ClassTooSmall(String, usize),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid parameters: {}", format_violations(.0))]
    InvalidParams(Vec<ParamViolation>),

    #[error("vector length {found} does not match vocabulary size {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vocabulary fingerprint {found} does not match model fingerprint {expected}")]
    VocabularyMismatch { expected: String, found: String },

    #[error("knowledge base has no entry for disease '{0}'")]
    MissingKbEntry(String),

    #[error("{file}: duplicate row for disease '{disease}'")]
    DuplicateKbRow { file: String, disease: String },

    #[error("model: {0}")]
    Model(String),

    #[error("{spec}: {source}")]
    InSpec {
        spec: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// True for failures of the environment (missing or unreadable files)
    /// rather than of the data or arguments.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::InSpec { source, .. } => source.is_io(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, err: csv::Error) -> Self {
        let path = path.into();
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(source) => Error::Io { path, source },
                _ => unreachable!(),
            }
        } else {
            Error::Format {
                path,
                message: err.to_string(),
            }
        }
    }
}

fn format_violations(violations: &[ParamViolation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
