//! Greedy HAG search.
//!
//! Each iteration takes the binary aggregation shared by the most nodes,
//! materializes it as a new aggregation node `w`, and rewires every node
//! that contained it to read `w` instead. The loop stops when the capacity
//! is used up or no pair is shared by at least `min_redundancy` nodes.
//!
//! In set mode a candidate pair is any two entries of one in-neighbor list.
//! In sequential mode it is the first two entries: every merge folds a list
//! prefix into one node, so the head of a list is always its longest
//! already-materialized prefix.
//!
//! Only input nodes are tracked as consumers. An aggregation node's list is
//! exactly the pair it was created from, and that pair has already been
//! rewired everywhere, so aggregation nodes never add redundancy.

mod index;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cost::CostCoefficients;
use crate::graph::{InputGraph, NodeId};
use crate::hag::{AggregateMode, Hag};

use index::{PairKey, RedundancyIndex};

/// How ties between equally redundant pairs are broken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Smallest `(v1, v2)` by node id.
    #[default]
    Lexicographic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub capacity: usize,
    pub mode: AggregateMode,
    pub tie_break: TieBreak,
    pub min_redundancy: u32,
}

impl SearchConfig {
    pub fn new(capacity: usize, mode: AggregateMode) -> Self {
        SearchConfig {
            capacity,
            mode,
            tie_break: TieBreak::Lexicographic,
            min_redundancy: 2,
        }
    }

    pub fn with_min_redundancy(mut self, min_redundancy: u32) -> Result<Self, String> {
        if min_redundancy < 2 {
            return Err(format!("min_redundancy must be at least 2, got {min_redundancy}"));
        }
        self.min_redundancy = min_redundancy;
        Ok(self)
    }
}

/// floor(|V| / 4).
pub fn default_capacity(g: &InputGraph) -> usize {
    g.num_nodes() / 4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub pair: [NodeId; 2],
    pub redundancy: u32,
    pub node: NodeId,
    pub delta_cost: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub records: Vec<IterationRecord>,
}

impl SearchTrace {
    /// One JSON object per iteration, newline-terminated.
    pub fn to_json_lines(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("trace record serializes") + "\n")
            .collect()
    }
}

/// Number of nodes of `h` that aggregate both `v1` and `v2` (set mode), or
/// whose in-neighbor list starts with `[v1, v2]` (sequential mode).
pub fn redundancy(h: &Hag, v1: NodeId, v2: NodeId, mode: AggregateMode) -> usize {
    (0..h.num_nodes())
        .map(NodeId::from_index)
        .filter(|&u| {
            let list = h.in_neighbors(u);
            match mode {
                AggregateMode::Set => list.contains(&v1) && list.contains(&v2),
                AggregateMode::Sequential => list.len() >= 2 && list[0] == v1 && list[1] == v2,
            }
        })
        .count()
}

/// Runs the greedy search to completion.
pub fn search(g: &InputGraph, cfg: SearchConfig, coeff: CostCoefficients) -> (Hag, SearchTrace) {
    let mut s = Searcher::new(g, cfg, coeff);
    while s.step().is_some() {}
    s.finish()
}

/// Step-wise greedy search over an owned working copy of the graph.
pub struct Searcher {
    cfg: SearchConfig,
    coeff: CostCoefficients,
    num_inputs: usize,
    lists: Vec<Vec<NodeId>>,
    agg: Vec<[NodeId; 2]>,
    index: RedundancyIndex,
    /// Set mode: consumers per node id. Sequential mode: consumers per
    /// head pair. Entries go stale when a list changes and are filtered on
    /// use.
    consumers: Vec<Vec<u32>>,
    head_users: HashMap<PairKey, Vec<u32>>,
    trace: SearchTrace,
    done: bool,
}

impl Searcher {
    pub fn new(g: &InputGraph, cfg: SearchConfig, coeff: CostCoefficients) -> Self {
        assert!(cfg.min_redundancy >= 2, "min_redundancy must be at least 2");
        let lists = g.neighbor_lists().to_vec();
        let mut counts: HashMap<PairKey, u32> = HashMap::new();
        let mut consumers = Vec::new();
        let mut head_users: HashMap<PairKey, Vec<u32>> = HashMap::new();
        match cfg.mode {
            AggregateMode::Set => {
                consumers = vec![Vec::new(); g.num_nodes()];
                for (u, list) in lists.iter().enumerate() {
                    for (i, &a) in list.iter().enumerate() {
                        consumers[a.index()].push(u as u32);
                        for &b in &list[i + 1..] {
                            *counts.entry(PairKey::unordered(a, b)).or_default() += 1;
                        }
                    }
                }
            }
            AggregateMode::Sequential => {
                for (u, list) in lists.iter().enumerate() {
                    if list.len() >= 2 {
                        let key = PairKey::ordered(list[0], list[1]);
                        *counts.entry(key).or_default() += 1;
                        head_users.entry(key).or_default().push(u as u32);
                    }
                }
            }
        }
        Searcher {
            cfg,
            coeff,
            num_inputs: g.num_nodes(),
            lists,
            agg: Vec::new(),
            index: RedundancyIndex::from_counts(counts, cfg.min_redundancy),
            consumers,
            head_users,
            trace: SearchTrace::default(),
            done: false,
        }
    }

    /// Current redundancy of a candidate pair as tracked by the index.
    pub fn tracked_redundancy(&self, v1: NodeId, v2: NodeId) -> u32 {
        let key = match self.cfg.mode {
            AggregateMode::Set => PairKey::unordered(v1, v2),
            AggregateMode::Sequential => PairKey::ordered(v1, v2),
        };
        self.index.count(key)
    }

    /// Performs one merge. Returns `None` once the search has terminated.
    pub fn step(&mut self) -> Option<&IterationRecord> {
        if self.done || self.agg.len() >= self.cfg.capacity {
            self.done = true;
            return None;
        }
        let Some((key, r)) = self.index.pop_best() else {
            self.done = true;
            return None;
        };
        let (v1, v2) = key.nodes();
        let w = NodeId::from_index(self.num_inputs + self.agg.len());
        self.agg.push([v1, v2]);
        let merged = match self.cfg.mode {
            AggregateMode::Set => self.merge_set(key, v1, v2, w),
            AggregateMode::Sequential => self.merge_sequential(key, v1, v2, w),
        };
        debug_assert_eq!(merged, r as usize, "index count disagrees with lists");
        let iteration = self.trace.records.len();
        self.trace.records.push(IterationRecord {
            iteration,
            pair: [v1, v2],
            redundancy: r,
            node: w,
            delta_cost: -self.coeff.alpha * (r as f64 - 1.0),
        });
        self.trace.records.last()
    }

    fn merge_set(&mut self, key: PairKey, v1: NodeId, v2: NodeId, w: NodeId) -> usize {
        self.consumers.push(Vec::new());
        // walk the shorter consumer list; drop entries that no longer hold it
        let (scan, other) = if self.consumers[v1.index()].len() <= self.consumers[v2.index()].len() {
            (v1, v2)
        } else {
            (v2, v1)
        };
        let mut users = std::mem::take(&mut self.consumers[scan.index()]);
        let lists = &self.lists;
        users.retain(|&u| lists[u as usize].contains(&scan));
        users.sort_unstable();
        users.dedup();
        let mut hits = Vec::new();
        users.retain(|&u| {
            if lists[u as usize].contains(&other) {
                hits.push(u);
                false
            } else {
                true
            }
        });
        self.consumers[scan.index()] = users;

        let mut deltas: HashMap<PairKey, i64> = HashMap::new();
        for &u in &hits {
            let list = &mut self.lists[u as usize];
            for &x in list.iter() {
                if x != v1 && x != v2 {
                    *deltas.entry(PairKey::unordered(v1, x)).or_default() -= 1;
                    *deltas.entry(PairKey::unordered(v2, x)).or_default() -= 1;
                    *deltas.entry(PairKey::unordered(w, x)).or_default() += 1;
                }
            }
            let p1 = list.iter().position(|&x| x == v1).unwrap();
            let p2 = list.iter().position(|&x| x == v2).unwrap();
            let (first, second) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
            list[first] = w;
            list.remove(second);
            self.consumers[w.index()].push(u);
        }
        *deltas.entry(key).or_default() -= hits.len() as i64;
        apply_sorted(&mut self.index, deltas);
        hits.len()
    }

    fn merge_sequential(&mut self, key: PairKey, v1: NodeId, v2: NodeId, w: NodeId) -> usize {
        let users = self.head_users.remove(&key).unwrap_or_default();
        let mut deltas: HashMap<PairKey, i64> = HashMap::new();
        let mut merged = 0;
        for u in users {
            let list = &mut self.lists[u as usize];
            if list.len() < 2 || list[0] != v1 || list[1] != v2 {
                continue;
            }
            list[1] = w;
            list.remove(0);
            merged += 1;
            if list.len() >= 2 {
                let next = PairKey::ordered(w, list[1]);
                *deltas.entry(next).or_default() += 1;
                self.head_users.entry(next).or_default().push(u);
            }
        }
        *deltas.entry(key).or_default() -= merged as i64;
        apply_sorted(&mut self.index, deltas);
        merged
    }

    pub fn trace(&self) -> &SearchTrace {
        &self.trace
    }

    pub fn num_agg_nodes(&self) -> usize {
        self.agg.len()
    }

    /// The current working HAG.
    pub fn snapshot(&self) -> Hag {
        Hag::from_ordered_parts(self.cfg.mode, self.num_inputs, self.agg.clone(), self.lists.clone())
    }

    pub fn finish(self) -> (Hag, SearchTrace) {
        let hag = Hag::from_ordered_parts(self.cfg.mode, self.num_inputs, self.agg, self.lists);
        (hag, self.trace)
    }
}

/// Applies deltas in key order so heap stamps are reproducible.
fn apply_sorted(index: &mut RedundancyIndex, deltas: HashMap<PairKey, i64>) {
    let mut deltas: Vec<_> = deltas.into_iter().filter(|&(_, d)| d != 0).collect();
    deltas.sort_unstable_by_key(|&(k, _)| k);
    for (k, d) in deltas {
        index.adjust(k, d);
    }
}
