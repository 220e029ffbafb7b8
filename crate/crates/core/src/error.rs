use std::fmt;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("tree {tree}, node {node}: count {parent} does not equal children counts {left} + {right}")]
    CountMismatch {
        tree: usize,
        node: i64,
        parent: u64,
        left: u64,
        right: u64,
    },

    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("data error at row {row}, column '{column}': {message}")]
    Data {
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("tree {tree}, node {node}: zero sample count on a marginalized branch")]
    ZeroCount { tree: usize, node: i64 },

    #[error("no observation matches the conditioning values {values:?} on columns {columns:?}")]
    UnsupportedConditioning { columns: Vec<usize>, values: Vec<f64> },

    #[error(
        "column {column} is continuous; run quantile discretization before conditioning on it with the discrete estimator"
    )]
    ContinuousConditioning { column: usize },

    #[error("degenerate query: every compatible leaf of tree {tree} has zero empirical mass")]
    DegenerateQuery { tree: usize },

    #[error("subset {subset:?}: {source}")]
    InSubset {
        subset: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("instance {instance}: {source}")]
    InInstance {
        instance: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{players} players exceed the enumeration limit of {limit}")]
    TooManyPlayers { players: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used by the CLI exit codes and the C ABI status codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Validation,
    Degenerate,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::TooManyPlayers { .. } | Error::ContinuousConditioning { .. } => {
                ErrorClass::Config
            }
            Error::Parse { .. }
            | Error::InvalidModel(_)
            | Error::CountMismatch { .. }
            | Error::Dimension { .. }
            | Error::Data { .. }
            | Error::InvalidData(_)
            | Error::Json(_)
            | Error::Csv(_) => ErrorClass::Validation,
            Error::ZeroCount { .. }
            | Error::UnsupportedConditioning { .. }
            | Error::DegenerateQuery { .. }
            | Error::Numerical(_) => ErrorClass::Degenerate,
            Error::InSubset { source, .. } | Error::InInstance { source, .. } => source.class(),
            Error::Io(_) => ErrorClass::Io,
        }
    }

    /// Instance id attached to this error, if any.
    pub fn instance(&self) -> Option<usize> {
        match self {
            Error::InInstance { instance, .. } => Some(*instance),
            _ => None,
        }
    }

    /// Tags the error with the instance it arose in.
    pub fn in_instance(self, instance: usize) -> Error {
        Error::InInstance {
            instance,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_subset(self, subset: Vec<usize>) -> Error {
        match self {
            e @ Error::InSubset { .. } => e,
            e => Error::InSubset {
                subset,
                source: Box::new(e),
            },
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorClass::Config => "configuration",
            ErrorClass::Validation => "validation",
            ErrorClass::Degenerate => "degenerate query",
            ErrorClass::Io => "io",
        };
        f.write_str(s)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
