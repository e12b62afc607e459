use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped by the CLI exit code they map to, see
/// [`Error::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow { row: usize, expected: usize, found: usize },

    #[error("row {row}, column '{column}': '{value}' is not a finite number")]
    NonNumeric { row: usize, column: String, value: String },

    #[error("label column '{0}' not found")]
    LabelColumnNotFound(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("block pair ({0}, {1}) has zero total weight, exponential rate undefined")]
    DegenerateBlock(usize, usize),

    #[error("instance too large for exhaustive search: {0} partitions exceed the limit")]
    TooLarge(u128),

    #[error("score undefined: partition has {0} non-empty clusters, at least 2 required")]
    UndefinedScore(usize),

    #[error("no valid clustering found: every candidate has fewer than 2 clusters")]
    NoValidClustering,
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::LengthMismatch { .. } | Error::TooLarge(_) => 1,
            Error::NoValidClustering | Error::UndefinedScore(_) => 3,
            _ => 2,
        }
    }
}
