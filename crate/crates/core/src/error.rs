use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Raised by an aggregator when a strategy violates the emission contract.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("emitted N_ijk = 0 (N_ij = {nij}); only non-zero configurations may be emitted")]
    ZeroCount { nij: u64 },
    #[error("emitted N_ijk = {nijk} greater than N_ij = {nij}")]
    CountExceedsContext { nijk: u64, nij: u64 },
    #[error("configuration {parents:?} / target state {target} emitted twice")]
    DuplicateConfiguration { parents: Vec<u16>, target: u16 },
    #[error("aggregation aborted: {0}")]
    Aborted(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("load error at row {row}: {message}")]
    Load { row: usize, message: String },
    #[error("load error: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("invalid database: {0}")]
    InvalidDatabase(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error("ADtree build failed: node cap of {cap} exceeded")]
    AdTreeNodeCap { cap: usize },
    #[error("database is not binary: variable {variable} has arity {arity}")]
    NonBinary { variable: usize, arity: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
