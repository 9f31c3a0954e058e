use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("series too short for correlation: {0} values")]
    TooShort(usize),
    #[error("correlation undefined: both series are constant")]
    UndefinedCorrelation,
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid value {value:?} in column {column}")]
    InvalidValue { column: String, value: String },
    #[error("unknown level {value:?} in category column {column}")]
    UnknownCategory { column: String, value: String },
    #[error("trust value {0} outside the 1..=7 scale")]
    TrustOutOfRange(i64),
    #[error("no rows left after cleaning")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible synthesis config: {0}")]
    InfeasibleSynthesis(String),
    #[error("labels contain a single class; both classes are required")]
    SingleClass,
    #[error("degenerate leaf: hessian sum plus lambda is zero")]
    DegenerateLeaf,
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed tree {tree}: {reason}")]
    MalformedTree { tree: usize, reason: String },
    #[error("brute-force Shapley limited to {cap} features, got {n}")]
    CapExceeded { n: usize, cap: usize },
    #[error("tree {tree} has a path over {count} distinct features, above the cap of {cap}")]
    TreeFeatureCap {
        tree: usize,
        count: usize,
        cap: usize,
    },
    #[error("feature index {index} out of range for {n} features")]
    FeatureOutOfRange { index: usize, n: usize },
    #[error("infeasible stratification: class {class} has {count} rows for {k} folds")]
    InfeasibleStratification { class: u8, count: usize, k: usize },
    #[error("interaction values are not present in this batch")]
    MissingInteractions,
    #[error("row index {index} out of range for {rows} rows")]
    RowOutOfRange { index: usize, rows: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}
