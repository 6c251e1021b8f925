//! Hierarchically aggregated computation graphs (HAGs) for GNNs.
//!
//! Neighboring nodes in real graphs share neighbors, so a plain per-node
//! aggregation recomputes the same partial sums many times. A HAG adds
//! intermediate aggregation nodes whose results are computed once and
//! reused. This crate provides:
//!
//! - [`graph`] and [`hag`]: the input graph, the HAG data model, `cover`,
//!   and the equivalence check (`cover(v) == N(v)` for every node);
//! - [`cost`]: the per-layer cost model and aggregation/transfer counters;
//! - [`search`]: greedy HAG construction under a capacity budget;
//! - [`exec`]: forward passes over the GNN-graph and over a HAG;
//! - [`oracle`]: brute-force references for checking the search;
//! - [`generate`]: synthetic graphs.

pub mod cost;
pub mod error;
pub mod exec;
pub mod generate;
pub mod graph;
pub mod hag;
pub mod oracle;
pub mod parallel;
pub mod search;

pub use cost::{evaluate_cost, savings, CostCoefficients, CostReport};
pub use error::{ExecError, GraphError, OracleError};
pub use graph::{InputGraph, NodeId};
pub use hag::{check_equivalence, AggregateMode, Cover, Equivalence, Hag};
pub use parallel::Parallelism;
pub use search::{default_capacity, search, SearchConfig, SearchTrace};
