use thiserror::Error;

use crate::graph::NodeId;

/// Errors raised while reading or validating graphs and HAGs.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),

    #[error("duplicate edge {src} -> {dst}")]
    DuplicateEdge { src: NodeId, dst: NodeId },

    #[error("node {node} out of range (node count {count})")]
    NodeOutOfRange { node: NodeId, count: usize },

    #[error("node count header {declared} is smaller than the {required} nodes referenced")]
    HeaderTooSmall { declared: usize, required: usize },

    #[error("aggregation nodes form a cycle through node {0}")]
    Cycle(NodeId),

    #[error("aggregation node {0} has no consumers")]
    UnusedAggregation(NodeId),

    #[error("invalid HAG document: {0}")]
    Schema(String),
}

/// Errors raised by the forward executors.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExecError {
    #[error("feature matrix has {rows} rows but the graph has {nodes} nodes")]
    RowMismatch { rows: usize, nodes: usize },

    #[error("feature dimension {found} does not match model dimension {expected}")]
    DimMismatch { expected: usize, found: usize },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Errors raised by the brute-force oracle.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance too large for exhaustive search: {nodes} nodes (max {max_nodes}), capacity {capacity} (max {max_capacity})")]
    TooLarge {
        nodes: usize,
        max_nodes: usize,
        capacity: usize,
        max_capacity: usize,
    },
}
