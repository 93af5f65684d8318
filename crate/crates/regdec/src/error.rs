//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected two whitespace-separated node IDs, got {tokens} token(s)")]
    MalformedEdgeLine { line: usize, tokens: usize },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("strong components are only defined for directed graphs")]
    StrongModeOnUndirected,

    #[error("node index {0} out of range for graph with {1} nodes")]
    NodeOutOfRange(u32, usize),

    #[error("target {target} is unreachable from reference {reference}; restrict to a connected component first")]
    UnreachablePair { reference: String, target: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample size {requested} exceeds node count {available}")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("graph is not connected in the required mode")]
    Disconnected,

    #[error("group {0} is empty")]
    EmptyGroup(u32),

    #[error("need at least k = {k} nodes, got n = {n}")]
    TooFewNodes { n: usize, k: u32 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0} is outside the valid domain: {1}")]
    Domain(&'static str, String),

    #[error("no sign change on bracket [{lo}, {hi}] while solving {what}")]
    NoSignChange { what: &'static str, lo: f64, hi: f64 },

    #[error("unknown node IDs in labeling: {0}")]
    UnknownNodeIds(String),

    #[error("labeling refers to group {group} but k = {k}")]
    GroupOutOfRange { group: u32, k: u32 },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
