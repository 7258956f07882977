use thiserror::Error;

/// Unified error type for matrix construction, channel simulation,
/// verification, generation, and bound evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("a matrix needs at least one row; the column count of an empty row list is undefined")]
    NoRows,

    #[error("row {row} has {got} entries, expected {want}")]
    RaggedRow { row: usize, got: usize, want: usize },

    #[error("entry at row {row}, column {col} is {value:?}; entries must be 0 or 1")]
    NonBinaryEntry { row: usize, col: usize, value: char },

    #[error("station {station} out of range 1..={n}")]
    StationOutOfRange { station: u32, n: u32 },

    #[error("slot {slot} out of range 1..={t}")]
    SlotOutOfRange { slot: usize, t: usize },

    #[error("column count mismatch: expected {expected}, got {got}")]
    ColumnCountMismatch { expected: u32, got: u32 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{combos} candidate subsets exceed the cap of {cap}; raise the cap or force to override")]
    CombinationCap { combos: u128, cap: u128 },

    #[error("matrix width {n} exceeds the exhaustive-verification cap of {cap} columns; force to override")]
    WidthCap { n: u32, cap: u32 },

    #[error("search space too large: {0}; force to override")]
    SearchCap(String),

    #[error("no verified sample found within {0} attempts")]
    AttemptLimit(u64),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
