//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any stage of the attribution pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate id `{id}` at lines {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },

    #[error("unregistered {what} `{value}` at line {line} (pass --allow-unregistered to admit it)")]
    Unregistered {
        what: &'static str,
        value: String,
        line: usize,
    },

    #[error("requested languages missing from corpus: {0}")]
    MissingLanguages(String),

    #[error("invalid selection: {0}")]
    InvalidSelection(String),

    #[error("test set must cover training languages: {0}")]
    LanguageCoverage(String),

    #[error("scorer: {0}")]
    Scorer(String),

    #[error("score file {path}: doc `{doc_id}`: {message}")]
    ScoreRecord {
        path: String,
        doc_id: String,
        message: String,
    },

    #[error("remote scoring failed after {attempts} attempts: {message}")]
    RemoteExhausted { attempts: u32, message: String },

    #[error("remote response invalid: {0}")]
    RemoteInvalid(String),

    #[error("features: {0}")]
    Features(String),

    #[error("document `{0}` failed to score: {1}")]
    DocFailed(String, String),

    #[error("classifier: {0}")]
    Classify(String),

    #[error("non-finite feature value in row {0}")]
    NonFiniteRow(usize),

    #[error("class `{class}` has {count} samples, fewer than {folds} folds; reduce --folds")]
    TooFewPerClass {
        class: String,
        count: usize,
        folds: usize,
    },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("evaluation: {0}")]
    Eval(String),

    #[error("synthesis: {0}")]
    Synth(String),

    #[error("experiment: {0}")]
    Experiment(String),

    #[error("json error in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// Whether a retry could plausibly succeed (transport-level remote failures).
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::RemoteExhausted { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
