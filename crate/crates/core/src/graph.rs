//! Input GNN-graph: dense node ids with ordered in-neighbor lists.
//!
//! The edge-list text format is one directed edge `u v` per line, meaning
//! `v` aggregates `u`. Lines starting with `#` are comments, except for an
//! optional `# nodes: N` header that fixes the node count (useful for
//! trailing isolated nodes). Neighbor order is first-appearance order.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Dense node index. Ids below `|V|` are input nodes, the rest are
/// aggregation nodes of a HAG.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        NodeId(u32::try_from(index).expect("node index exceeds u32 range"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A validated GNN-graph. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputGraph {
    in_neighbors: Vec<Vec<NodeId>>,
    num_edges: usize,
}

impl InputGraph {
    /// Builds a graph from per-node in-neighbor lists, rejecting self-loops,
    /// duplicates and out-of-range ids.
    pub fn from_in_neighbors(in_neighbors: Vec<Vec<NodeId>>) -> Result<Self, GraphError> {
        let n = in_neighbors.len();
        let mut seen = HashSet::new();
        let mut num_edges = 0;
        for (v, list) in in_neighbors.iter().enumerate() {
            let dst = NodeId::from_index(v);
            seen.clear();
            for &u in list {
                if u.index() >= n {
                    return Err(GraphError::NodeOutOfRange { node: u, count: n });
                }
                if u == dst {
                    return Err(GraphError::SelfLoop(u));
                }
                if !seen.insert(u) {
                    return Err(GraphError::DuplicateEdge { src: u, dst });
                }
            }
            num_edges += list.len();
        }
        Ok(InputGraph {
            in_neighbors,
            num_edges,
        })
    }

    /// Builds a graph with `num_nodes` nodes from directed edges `(u, v)`
    /// (v aggregates u), keeping edge order as neighbor order.
    pub fn from_edges(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, GraphError> {
        let mut lists = vec![Vec::new(); num_nodes];
        for (u, v) in edges {
            for id in [u, v] {
                if id as usize >= num_nodes {
                    return Err(GraphError::NodeOutOfRange {
                        node: NodeId(id),
                        count: num_nodes,
                    });
                }
            }
            lists[v as usize].push(NodeId(u));
        }
        Self::from_in_neighbors(lists)
    }

    pub fn empty(num_nodes: usize) -> Self {
        InputGraph {
            in_neighbors: vec![Vec::new(); num_nodes],
            num_edges: 0,
        }
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.in_neighbors.len()
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    #[inline]
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_neighbors[v.index()]
    }

    pub fn neighbor_lists(&self) -> &[Vec<NodeId>] {
        &self.in_neighbors
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.num_nodes()).map(NodeId::from_index)
    }

    /// Σ_v max(|N(v)| − 1, 0): binary aggregations of the plain GNN-graph.
    pub fn flat_aggregations(&self) -> usize {
        self.in_neighbors
            .iter()
            .map(|l| l.len().saturating_sub(1))
            .sum()
    }

    /// Parses the edge-list format. With `undirected`, every line `u v`
    /// also contributes the reverse edge `v u`.
    pub fn parse_edge_list(text: &str, undirected: bool) -> Result<Self, GraphError> {
        let mut header: Option<usize> = None;
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut max_id: Option<u32> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(n) = parse_header(comment, line_no)? {
                    header = Some(n);
                }
                continue;
            }
            let mut fields = line.split_whitespace();
            let parse_id = |tok: Option<&str>| -> Result<u32, GraphError> {
                let tok = tok.ok_or_else(|| GraphError::Parse {
                    line: line_no,
                    message: "expected two node ids".into(),
                })?;
                tok.parse::<u32>().map_err(|e| GraphError::Parse {
                    line: line_no,
                    message: format!("bad node id {tok:?}: {e}"),
                })
            };
            let u = parse_id(fields.next())?;
            let v = parse_id(fields.next())?;
            if fields.next().is_some() {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: "trailing tokens after edge".into(),
                });
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push((u, v));
            if undirected {
                edges.push((v, u));
            }
        }

        let required = max_id.map_or(0, |m| m as usize + 1);
        let num_nodes = match header {
            Some(n) if n < required => {
                return Err(GraphError::HeaderTooSmall {
                    declared: n,
                    required,
                })
            }
            Some(n) => n,
            None => required,
        };
        Self::from_edges(num_nodes, edges)
    }

    /// Writes the graph back as an edge list that parses to an identical graph
    /// (same node count and neighbor order).
    pub fn to_edge_list(&self) -> String {
        // Neighbor order is first-appearance order per destination, so emitting
        // destination-major keeps every list intact.
        let mut out = format!("# nodes: {}\n", self.num_nodes());
        for v in self.nodes() {
            for u in self.in_neighbors(v) {
                out.push_str(&format!("{u} {v}\n"));
            }
        }
        out
    }
}

fn parse_header(comment: &str, line: usize) -> Result<Option<usize>, GraphError> {
    let Some(rest) = comment.trim().strip_prefix("nodes") else {
        return Ok(None);
    };
    let rest = rest.trim_start();
    let rest = rest.strip_prefix(':').unwrap_or(rest).trim();
    rest.parse::<usize>().map(Some).map_err(|_| GraphError::Parse {
        line,
        message: format!("bad node count header {rest:?}"),
    })
}
