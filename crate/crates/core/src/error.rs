use std::path::PathBuf;

/// Errors raised across the crate.
///
/// A learner abort (frontier overflow) is *not* an error; it is reported as
/// [`crate::learner::Verdict::Fail`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range 1..={n}")]
    VariableOutOfRange { index: usize, n: usize },

    #[error("variable x{0} appears more than once on a root-to-leaf path")]
    RepeatedVariable(usize),

    #[error("invalid point coordinate {0}; entries must be -1 or +1")]
    InvalidCoordinate(i64),

    #[error("tree with {size} leaves is infeasible over {n} variables")]
    InfeasibleSize { size: usize, n: usize },

    #[error("parity tree needs a nonempty variable set")]
    EmptyParity,

    #[error("unsupported variable count {0}; must be between 1 and 64")]
    UnsupportedDimension(usize),

    #[error("tree parse error at byte {pos}: {msg}")]
    TreeParse { pos: usize, msg: String },

    #[error("invalid margin c = {0}; must lie in (0, 1/2)")]
    InvalidMargin(f64),

    #[error("mean mu[{index}] = {value} is not {margin}-bounded")]
    NotBounded { index: usize, value: f64, margin: f64 },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("enumeration over {n} variables exceeds the cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("polynomial basis does not match the requested distribution")]
    BasisMismatch,

    #[error("coefficient table is incomplete; translation needs every superset")]
    IncompleteTable,

    #[error("oracle routes disagree: {0}")]
    OracleDisagreement(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
