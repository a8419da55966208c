use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid irrational spec: {0}")]
    InvalidSpec(String),
    #[error("bracket at depth {depth} cannot decide the comparison")]
    IndecisiveBracket { depth: usize },
    #[error("no decision up to the maximum bracket depth {max_depth}")]
    DepthCapExceeded { max_depth: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("certificate {name} failed at level {level:?}: value {value} vs bound {bound}")]
    ValidationFailure {
        name: String,
        level: Option<u32>,
        /// `num/den`
        value: String,
        bound: String,
    },
    #[error("index {j} out of range at level {n}")]
    IndexOutOfRange { n: u32, j: String },
    #[error("requested depth {depth} exceeds the {available} levels of the profile")]
    DepthExceedsProfile { depth: u32, available: u32 },
    #[error("m = {0} lies below the first window")]
    BelowFirstWindow(i64),
    #[error("m = {0} lies beyond the last window covered by the profile")]
    BeyondLastWindow(i64),
    #[error("sample depth {depth} too shallow; need at least {required}")]
    InsufficientDepth { depth: u32, required: u32 },
    #[error("operation not available for the {0} variant")]
    VariantMismatch(&'static str),
    #[error("enumeration of {requested} items exceeds the cap {cap}")]
    EnumerationCapExceeded { requested: String, cap: u64 },
    #[error("accumulated error bound {bound} exceeds the cap {cap}")]
    ErrorBudgetBlown { bound: String, cap: String },
}
