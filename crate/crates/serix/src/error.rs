use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("series too short: length {got}, need at least {min}")]
    SeriesTooShort { got: usize, min: usize },

    #[error("dataset storage size {storage} is not a multiple of series length {n}")]
    RaggedStorage { storage: usize, n: usize },

    #[error("requested {requested} positions but only {available} are available")]
    SelectionTooLarge { requested: usize, available: usize },

    #[error("need at least {min} sample values, got {got}")]
    SampleTooSmall { got: usize, min: usize },

    #[error("degenerate sample: all values equal ({value})")]
    DegenerateSample { value: f64 },

    #[error("alphabet size {0} must be a power of two in 2..=256")]
    BadAlphabet(usize),

    #[error("could not learn {wanted} non-degenerate dimensions, only {usable} usable")]
    NotEnoughDimensions { wanted: usize, usable: usize },

    #[error("k={k} exceeds dataset size {n}")]
    KTooLarge { k: usize, n: usize },

    #[error("word length {l} exceeds series length {n}")]
    WordTooLong { l: usize, n: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("file {path} has {size} bytes, expected {expected} (N={count} x n={n} x 4)")]
    FileSizeMismatch {
        path: PathBuf,
        size: u64,
        expected: u64,
        count: usize,
        n: usize,
    },

    #[error("corrupt {what}: {detail}")]
    Corrupt { what: &'static str, detail: String },

    #[error("hash mismatch: index snapshot was built from different {what}")]
    HashMismatch { what: &'static str },

    #[error("unknown {what}: {got}")]
    Unknown { what: &'static str, got: String },

    #[error("lower-bound audit failed: {0}")]
    AuditFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
