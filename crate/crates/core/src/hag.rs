//! Hierarchically aggregated computation graph (HAG).
//!
//! A HAG keeps the `|V|` input nodes and adds binary aggregation nodes
//! `V_A`, numbered `|V|..|V|+|V_A|`. An edge from an input node always
//! carries that node's previous-layer activation; an edge from an
//! aggregation node carries its partial aggregate. Only edges between
//! aggregation nodes can therefore form cycles, and those are rejected.

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::graph::{InputGraph, NodeId};

/// Whether `Aggregate` is an order-invariant set reduction or an ordered fold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AggregateMode {
    #[default]
    Set,
    Sequential,
}

impl AggregateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AggregateMode::Set => "set",
            AggregateMode::Sequential => "sequential",
        }
    }
}

impl std::str::FromStr for AggregateMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "set" => Ok(AggregateMode::Set),
            "sequential" | "seq" => Ok(AggregateMode::Sequential),
            other => Err(format!("unknown aggregate mode {other:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Hag {
    mode: AggregateMode,
    num_input_nodes: usize,
    agg_nodes: Vec<[NodeId; 2]>,
    input_in_neighbors: Vec<Vec<NodeId>>,
    /// Aggregation-node offsets (relative to `num_input_nodes`) in dependency order.
    topo_order: Vec<u32>,
}

// topo_order is derived, and any valid order describes the same HAG
impl PartialEq for Hag {
    fn eq(&self, other: &Self) -> bool {
        self.mode == other.mode
            && self.num_input_nodes == other.num_input_nodes
            && self.agg_nodes == other.agg_nodes
            && self.input_in_neighbors == other.input_in_neighbors
    }
}

impl Eq for Hag {}

impl Hag {
    /// The GNN-graph viewed as a HAG with no aggregation nodes.
    pub fn trivial(g: &InputGraph, mode: AggregateMode) -> Self {
        Hag {
            mode,
            num_input_nodes: g.num_nodes(),
            agg_nodes: Vec::new(),
            input_in_neighbors: g.neighbor_lists().to_vec(),
            topo_order: Vec::new(),
        }
    }

    /// Builds a HAG from raw parts, checking id ranges, acyclicity among
    /// aggregation nodes, and that every aggregation node is consumed.
    pub fn from_parts(
        mode: AggregateMode,
        num_input_nodes: usize,
        agg_nodes: Vec<[NodeId; 2]>,
        input_in_neighbors: Vec<Vec<NodeId>>,
    ) -> Result<Self, GraphError> {
        if input_in_neighbors.len() != num_input_nodes {
            return Err(GraphError::Schema(format!(
                "expected {num_input_nodes} input neighbor lists, found {}",
                input_in_neighbors.len()
            )));
        }
        let total = num_input_nodes + agg_nodes.len();
        let mut used = vec![false; agg_nodes.len()];
        let all_lists = agg_nodes
            .iter()
            .map(|p| p.as_slice())
            .chain(input_in_neighbors.iter().map(|l| l.as_slice()));
        for list in all_lists {
            for &u in list {
                if u.index() >= total {
                    return Err(GraphError::NodeOutOfRange {
                        node: u,
                        count: total,
                    });
                }
                if u.index() >= num_input_nodes {
                    used[u.index() - num_input_nodes] = true;
                }
            }
        }
        if let Some(i) = used.iter().position(|&u| !u) {
            return Err(GraphError::UnusedAggregation(NodeId::from_index(
                num_input_nodes + i,
            )));
        }
        let topo_order = topo_sort(num_input_nodes, &agg_nodes)?;
        Ok(Hag {
            mode,
            num_input_nodes,
            agg_nodes,
            input_in_neighbors,
            topo_order,
        })
    }

    /// Parts produced by the search, where every aggregation node only
    /// references lower ids. Checked in debug builds.
    pub(crate) fn from_ordered_parts(
        mode: AggregateMode,
        num_input_nodes: usize,
        agg_nodes: Vec<[NodeId; 2]>,
        input_in_neighbors: Vec<Vec<NodeId>>,
    ) -> Self {
        debug_assert!(agg_nodes.iter().enumerate().all(|(i, pair)| pair
            .iter()
            .all(|u| u.index() < num_input_nodes + i)));
        let topo_order = (0..agg_nodes.len() as u32).collect();
        Hag {
            mode,
            num_input_nodes,
            agg_nodes,
            input_in_neighbors,
            topo_order,
        }
    }

    #[inline]
    pub fn mode(&self) -> AggregateMode {
        self.mode
    }

    #[inline]
    pub fn num_input_nodes(&self) -> usize {
        self.num_input_nodes
    }

    #[inline]
    pub fn num_agg_nodes(&self) -> usize {
        self.agg_nodes.len()
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.num_input_nodes + self.agg_nodes.len()
    }

    /// |Ê|: every in-edge of input and aggregation nodes.
    pub fn num_edges(&self) -> usize {
        2 * self.agg_nodes.len() + self.input_in_neighbors.iter().map(Vec::len).sum::<usize>()
    }

    #[inline]
    pub fn is_agg(&self, v: NodeId) -> bool {
        v.index() >= self.num_input_nodes
    }

    pub fn agg_nodes(&self) -> &[[NodeId; 2]] {
        &self.agg_nodes
    }

    pub fn input_in_neighbors(&self) -> &[Vec<NodeId>] {
        &self.input_in_neighbors
    }

    /// In-neighbors N̂_v of any node.
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        if self.is_agg(v) {
            &self.agg_nodes[v.index() - self.num_input_nodes]
        } else {
            &self.input_in_neighbors[v.index()]
        }
    }

    /// Aggregation nodes (as ids) in an order where inputs come first.
    pub fn agg_topo_order(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.topo_order
            .iter()
            .map(move |&i| NodeId::from_index(self.num_input_nodes + i as usize))
    }

    /// Aggregation nodes grouped by depth; nodes in one level only depend on
    /// input nodes and on earlier levels.
    pub fn agg_levels(&self) -> Vec<Vec<NodeId>> {
        let n = self.num_input_nodes;
        let mut depth = vec![0usize; self.agg_nodes.len()];
        let mut levels: Vec<Vec<NodeId>> = Vec::new();
        for w in self.agg_topo_order() {
            let i = w.index() - n;
            let d = self.agg_nodes[i]
                .iter()
                .filter(|u| u.index() >= n)
                .map(|u| depth[u.index() - n] + 1)
                .max()
                .unwrap_or(0);
            depth[i] = d;
            if levels.len() <= d {
                levels.resize_with(d + 1, Vec::new);
            }
            levels[d].push(w);
        }
        levels
    }

    /// cover(v) for one node.
    pub fn cover(&self, v: NodeId) -> Result<Cover, GraphError> {
        if v.index() >= self.num_nodes() {
            return Err(GraphError::NodeOutOfRange {
                node: v,
                count: self.num_nodes(),
            });
        }
        let nodes = if self.is_agg(v) {
            self.expand(self.in_neighbors(v), usize::MAX).0
        } else if self.in_neighbors(v).is_empty() {
            vec![v]
        } else {
            self.expand(self.in_neighbors(v), usize::MAX).0
        };
        Ok(Cover::new(self.mode, nodes))
    }

    /// Covers of every aggregation node, memoized in dependency order.
    pub fn agg_covers(&self) -> Vec<Vec<NodeId>> {
        let n = self.num_input_nodes;
        let mut memo: Vec<Vec<NodeId>> = vec![Vec::new(); self.agg_nodes.len()];
        for w in self.agg_topo_order() {
            let mut acc = Vec::new();
            for &u in &self.agg_nodes[w.index() - n] {
                if u.index() >= n {
                    acc.extend_from_slice(&memo[u.index() - n]);
                } else {
                    acc.push(u);
                }
            }
            memo[w.index() - n] = acc;
        }
        memo
    }

    /// Flattens a list of in-neighbors into input ids, in order. Stops once
    /// more than `limit` ids were produced; the flag reports truncation.
    fn expand(&self, list: &[NodeId], limit: usize) -> (Vec<NodeId>, bool) {
        let n = self.num_input_nodes;
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = list.iter().rev().copied().collect();
        while let Some(u) = stack.pop() {
            if u.index() >= n {
                let pair = &self.agg_nodes[u.index() - n];
                stack.push(pair[1]);
                stack.push(pair[0]);
            } else {
                if out.len() == limit {
                    return (out, true);
                }
                out.push(u);
            }
        }
        (out, false)
    }

    pub fn to_document(&self) -> HagDocument {
        HagDocument {
            num_input_nodes: self.num_input_nodes,
            mode: self.mode,
            agg_nodes: self.agg_nodes.iter().map(|[a, b]| [a.0, b.0]).collect(),
            input_in_neighbors: self
                .input_in_neighbors
                .iter()
                .map(|l| l.iter().map(|u| u.0).collect())
                .collect(),
        }
    }

    pub fn from_document(doc: HagDocument) -> Result<Self, GraphError> {
        let agg = doc
            .agg_nodes
            .into_iter()
            .map(|[a, b]| [NodeId(a), NodeId(b)])
            .collect();
        let inputs = doc
            .input_in_neighbors
            .into_iter()
            .map(|l| l.into_iter().map(NodeId).collect())
            .collect();
        Hag::from_parts(doc.mode, doc.num_input_nodes, agg, inputs)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("HAG document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: HagDocument =
            serde_json::from_str(text).map_err(|e| GraphError::Schema(e.to_string()))?;
        Hag::from_document(doc)
    }
}

/// On-disk HAG layout. Field order is the write order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HagDocument {
    pub num_input_nodes: usize,
    pub mode: AggregateMode,
    pub agg_nodes: Vec<[u32; 2]>,
    pub input_in_neighbors: Vec<Vec<u32>>,
}

/// Kahn's algorithm over aggregation-to-aggregation edges.
fn topo_sort(n: usize, agg: &[[NodeId; 2]]) -> Result<Vec<u32>, GraphError> {
    let k = agg.len();
    let mut indegree = vec![0u32; k];
    let mut consumers: Vec<Vec<u32>> = vec![Vec::new(); k];
    for (i, pair) in agg.iter().enumerate() {
        for u in pair {
            if u.index() >= n {
                indegree[i] += 1;
                consumers[u.index() - n].push(i as u32);
            }
        }
    }
    let mut ready: Vec<u32> = (0..k as u32).filter(|&i| indegree[i as usize] == 0).collect();
    ready.reverse();
    let mut order = Vec::with_capacity(k);
    while let Some(i) = ready.pop() {
        order.push(i);
        for &c in &consumers[i as usize] {
            indegree[c as usize] -= 1;
            if indegree[c as usize] == 0 {
                ready.push(c);
            }
        }
    }
    if order.len() < k {
        let stuck = (0..k).find(|&i| indegree[i] > 0).unwrap();
        return Err(GraphError::Cycle(NodeId::from_index(n + stuck)));
    }
    Ok(order)
}

/// cover(v): the input nodes whose activations feed `v`.
///
/// In set mode the ids are sorted; duplicates are kept so that a node
/// reached twice through different paths stays visible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub mode: AggregateMode,
    pub nodes: Vec<NodeId>,
}

impl Cover {
    fn new(mode: AggregateMode, mut nodes: Vec<NodeId>) -> Self {
        if mode == AggregateMode::Set {
            nodes.sort_unstable();
        }
        Cover { mode, nodes }
    }

    pub fn has_duplicates(&self) -> bool {
        let mut sorted = self.nodes.clone();
        sorted.sort_unstable();
        sorted.windows(2).any(|w| w[0] == w[1])
    }
}

/// Outcome of the cover-equals-neighbors check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Mismatch {
        node: NodeId,
        expected: Vec<NodeId>,
        /// Flattened cover; cut short when it grew past `expected`.
        found: Vec<NodeId>,
        truncated: bool,
    },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

impl std::fmt::Display for Equivalence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |v: &[NodeId]| v.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Equivalence::Equivalent => write!(f, "equivalent"),
            Equivalence::Mismatch {
                node,
                expected,
                found,
                truncated,
            } => write!(
                f,
                "mismatch at node {node}: neighbors [{}], cover [{}{}]",
                join(expected),
                join(found),
                if *truncated { ",..." } else { "" }
            ),
        }
    }
}

/// Checks `N(v) == cover(v)` for every input node: multiset equality in set
/// mode, sequence equality in sequential mode.
pub fn check_equivalence(g: &InputGraph, h: &Hag) -> Result<Equivalence, GraphError> {
    if g.num_nodes() != h.num_input_nodes() {
        return Err(GraphError::Schema(format!(
            "graph has {} nodes, HAG has {} input nodes",
            g.num_nodes(),
            h.num_input_nodes()
        )));
    }
    for v in g.nodes() {
        let expected = g.in_neighbors(v);
        let (mut found, truncated) = h.expand(h.in_neighbors(v), expected.len());
        let ok = !truncated
            && match h.mode() {
                AggregateMode::Sequential => found == expected,
                AggregateMode::Set => {
                    let mut want = expected.to_vec();
                    want.sort_unstable();
                    found.sort_unstable();
                    found == want
                }
            };
        if !ok {
            return Ok(Equivalence::Mismatch {
                node: v,
                expected: expected.to_vec(),
                found,
                truncated,
            });
        }
    }
    Ok(Equivalence::Equivalent)
}
