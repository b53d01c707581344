use thiserror::Error;

/// Errors produced by the estimation, ranking and ingestion routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("group `{0}` has no individuals (n = 0)")]
    EmptyGroup(String),

    #[error("group `{label}` has k = {k} favorable outcomes out of n = {n}")]
    InvalidCounts { label: String, n: u64, k: u64 },

    #[error("invalid posterior shape ({alpha}, {beta}): both parameters must be at least 1")]
    InvalidShape { alpha: u64, beta: u64 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("the two groups of a pair must differ, both are labeled `{0}`")]
    SameGroup(String),

    #[error("duplicate group label `{0}`")]
    DuplicateGroup(String),

    #[error("at least two groups are required, got {0}")]
    TooFewGroups(usize),

    #[error("input is empty")]
    EmptyInput,

    #[error("column `{0}` is not present in the dataset")]
    MissingColumn(String),

    #[error("invalid criterion: {0}")]
    InvalidCriterion(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("utility `{name}` violates {failures} of the trivial preference inequalities")]
    AxiomViolation { name: String, failures: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
