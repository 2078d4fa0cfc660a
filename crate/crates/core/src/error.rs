use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between reading a CSV and writing a report.
#[derive(Debug, Error)]
pub enum Error {
    // data problems
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a finite number")]
    BadNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: label `{value}` is not 0 or 1")]
    BadLabel { row: usize, value: String },
    #[error("column `{column}`: unseen category `{value}`")]
    UnseenCategory { column: String, value: String },
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    // configuration problems
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    // training / evaluation problems
    #[error("class {0} is absent from the data")]
    MissingClass(u8),
    #[error("training diverged: non-finite loss at step {0}")]
    Diverged(usize),
    #[error("non-finite score at position {0}")]
    NonFiniteScore(usize),

    // model files
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("unsupported model file format_version {found} (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("model kind mismatch: file holds `{found}`, expected `{expected}`")]
    KindMismatch { found: String, expected: String },
    #[error("partition checksum mismatch: the data, seed or split fraction differ from training time")]
    PartitionMismatch,
}

impl Error {
    /// Process exit code for the CLI: 2 for data errors, 1 for bad
    /// parameters, 3 for training or evaluation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 1,
            Error::MissingClass(_) | Error::Diverged(_) | Error::NonFiniteScore(_) => 3,
            _ => 2,
        }
    }
}
