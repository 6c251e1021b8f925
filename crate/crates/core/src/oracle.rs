//! Independent reference implementations used to check the greedy search.
//!
//! - [`brute_force_optimal_set`]: exhaustive minimum-cost set-mode HAG on
//!   tiny graphs.
//! - [`prefix_lower_bound`]: number of distinct neighbor-list prefixes of
//!   length ≥ 2, a lower bound on sequential aggregations.
//! - [`rescan_search`]: the greedy loop with a full pair rescan per
//!   iteration instead of the incremental heap.
//!
//! None of these share code with the search module.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::cost::{evaluate_cost, CostCoefficients};
use crate::error::OracleError;
use crate::graph::{InputGraph, NodeId};
use crate::hag::{AggregateMode, Hag};
use crate::search::{IterationRecord, SearchConfig, SearchTrace};

pub const MAX_ORACLE_NODES: usize = 8;
pub const MAX_ORACLE_CAPACITY: usize = 4;

#[derive(Clone, Debug)]
pub struct OptimalResult {
    pub best_cost: f64,
    pub best_hag: Hag,
    pub num_candidates_examined: usize,
}

type Mask = u16;

/// Exhaustively finds a minimum-cost equivalent set-mode HAG with at most
/// `capacity` binary aggregation nodes.
///
/// An aggregation node is identified by the set of inputs it covers and must
/// split into two parts that are each a single input or another chosen node.
/// Only subsets of some neighbor set are considered; any other node could
/// never be consumed. Each input node then reads the smallest exact
/// partition of its neighbor set into available pieces.
pub fn brute_force_optimal_set(
    g: &InputGraph,
    capacity: usize,
    coeff: CostCoefficients,
) -> Result<OptimalResult, OracleError> {
    let n = g.num_nodes();
    if n > MAX_ORACLE_NODES || capacity > MAX_ORACLE_CAPACITY {
        return Err(OracleError::TooLarge {
            nodes: n,
            max_nodes: MAX_ORACLE_NODES,
            capacity,
            max_capacity: MAX_ORACLE_CAPACITY,
        });
    }
    let neighbor_masks: Vec<Mask> = g
        .nodes()
        .map(|v| g.in_neighbors(v).iter().fold(0, |m, u| m | (1 << u.0)))
        .collect();

    let mut candidates: Vec<Mask> = Vec::new();
    let mut seen = HashSet::new();
    for &nm in &neighbor_masks {
        let mut sub = nm;
        while sub != 0 {
            if sub.count_ones() >= 2 && seen.insert(sub) {
                candidates.push(sub);
            }
            sub = (sub - 1) & nm;
        }
    }
    // children always precede parents in this order
    candidates.sort_unstable_by_key(|&m| (m.count_ones(), m));

    let mut search = Exhaustive {
        n,
        coeff,
        neighbor_masks: &neighbor_masks,
        candidates: &candidates,
        capacity,
        best: None,
        examined: 0,
    };
    let mut chosen = Vec::new();
    search.visit(&mut chosen, 0);
    let (best_cost_dp, best_set) = search.best.expect("empty set is always examined");
    let examined = search.examined;

    let best_hag = build_hag(n, &neighbor_masks, &best_set);
    let best_cost = evaluate_cost(&best_hag, coeff).cost_value;
    debug_assert!((best_cost - best_cost_dp).abs() < 1e-9);
    Ok(OptimalResult {
        best_cost,
        best_hag,
        num_candidates_examined: examined,
    })
}

struct Exhaustive<'a> {
    n: usize,
    coeff: CostCoefficients,
    neighbor_masks: &'a [Mask],
    candidates: &'a [Mask],
    capacity: usize,
    best: Option<(f64, Vec<Mask>)>,
    examined: usize,
}

impl Exhaustive<'_> {
    fn visit(&mut self, chosen: &mut Vec<Mask>, start: usize) {
        self.examined += 1;
        let reads: usize = self
            .neighbor_masks
            .iter()
            .map(|&nm| min_partition(nm, chosen).0)
            .sum();
        let edges = 2 * chosen.len() + reads;
        let cost = self.coeff.cost_of(edges, chosen.len(), self.n);
        if self.best.as_ref().is_none_or(|(c, _)| cost < *c - 1e-12) {
            self.best = Some((cost, chosen.clone()));
        }
        if chosen.len() == self.capacity {
            return;
        }
        for i in start..self.candidates.len() {
            let m = self.candidates[i];
            if split(m, chosen).is_some() {
                chosen.push(m);
                self.visit(chosen, i + 1);
                chosen.pop();
            }
        }
    }
}

/// A way to write `m` as a disjoint union of two available pieces
/// (singletons or chosen masks).
fn split(m: Mask, chosen: &[Mask]) -> Option<(Mask, Mask)> {
    let available = |p: Mask| p.count_ones() == 1 || chosen.contains(&p);
    let singles = (0..16).map(|b| 1 << b).filter(|&b: &Mask| m & b != 0);
    let inner = chosen.iter().copied().filter(|&c| c != m && c & m == c);
    for part in inner.chain(singles) {
        let rest = m ^ part;
        if rest != 0 && available(rest) {
            return Some((part, rest));
        }
    }
    None
}

/// Fewest pieces exactly partitioning `target`, and the pieces themselves.
fn min_partition(target: Mask, chosen: &[Mask]) -> (usize, Vec<Mask>) {
    if target == 0 {
        return (0, Vec::new());
    }
    let pieces: Vec<Mask> = chosen
        .iter()
        .copied()
        .filter(|&c| c & target == c)
        .chain((0..16).map(|b| 1 << b).filter(|&b: &Mask| target & b != 0))
        .collect();
    // dp over submasks of target, indexed by the full mask value
    let size = (target as usize) + 1;
    let mut dp = vec![usize::MAX; size];
    let mut pick = vec![0 as Mask; size];
    dp[0] = 0;
    let mut subs: Vec<Mask> = Vec::new();
    let mut s = target;
    loop {
        subs.push(s);
        if s == 0 {
            break;
        }
        s = (s - 1) & target;
    }
    subs.sort_unstable_by_key(|s| s.count_ones());
    for &s in &subs[1..] {
        let low = s & s.wrapping_neg();
        for &p in &pieces {
            if p & low != 0 && p & s == p {
                let prev = dp[(s ^ p) as usize];
                if prev != usize::MAX && prev + 1 < dp[s as usize] {
                    dp[s as usize] = prev + 1;
                    pick[s as usize] = p;
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut s = target;
    while s != 0 {
        let p = pick[s as usize];
        out.push(p);
        s ^= p;
    }
    (dp[target as usize], out)
}

fn build_hag(n: usize, neighbor_masks: &[Mask], chosen: &[Mask]) -> Hag {
    let id_of = |p: Mask| -> NodeId {
        if p.count_ones() == 1 {
            NodeId(p.trailing_zeros())
        } else {
            let i = chosen.iter().position(|&c| c == p).expect("piece is chosen");
            NodeId::from_index(n + i)
        }
    };
    let agg = chosen
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let (a, b) = split(m, &chosen[..i]).expect("chosen nodes are buildable in order");
            [id_of(a), id_of(b)]
        })
        .collect();
    let inputs = neighbor_masks
        .iter()
        .map(|&nm| min_partition(nm, chosen).1.into_iter().map(id_of).collect())
        .collect();
    Hag::from_parts(AggregateMode::Set, n, agg, inputs).expect("oracle HAG is well formed")
}

/// Distinct ordered prefixes `L_v^(i)`, `2 ≤ i ≤ |N(v)|`, over all nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrefixBound {
    pub lb: usize,
}

pub fn prefix_lower_bound(g: &InputGraph) -> PrefixBound {
    let mut prefixes: HashSet<&[NodeId]> = HashSet::new();
    for v in g.nodes() {
        let list = g.in_neighbors(v);
        for i in 2..=list.len() {
            prefixes.insert(&list[..i]);
        }
    }
    PrefixBound { lb: prefixes.len() }
}

/// cost(greedy) ≤ cost(G)/e + (1 − 1/e)·cost(optimal).
pub fn verify_approximation(
    g: &InputGraph,
    greedy: &Hag,
    optimal: &OptimalResult,
    coeff: CostCoefficients,
) -> bool {
    let e = std::f64::consts::E;
    let trivial = evaluate_cost(&Hag::trivial(g, AggregateMode::Set), coeff).cost_value;
    let greedy_cost = evaluate_cost(greedy, coeff).cost_value;
    let bound = trivial / e + (e - 1.0) / e * optimal.best_cost;
    greedy_cost <= bound + 1e-9 * bound.abs().max(1.0)
}

/// Greedy search that recounts every candidate pair from scratch each
/// iteration. Same selection and rewiring rules as the indexed search.
pub fn rescan_search(g: &InputGraph, cfg: SearchConfig, coeff: CostCoefficients) -> (Hag, SearchTrace) {
    let n = g.num_nodes();
    let mut lists: Vec<Vec<NodeId>> = g.neighbor_lists().to_vec();
    let mut agg: Vec<[NodeId; 2]> = Vec::new();
    let mut trace = SearchTrace::default();
    while agg.len() < cfg.capacity {
        let mut counts: BTreeMap<(NodeId, NodeId), u32> = BTreeMap::new();
        for list in &lists {
            match cfg.mode {
                AggregateMode::Set => {
                    for (i, &a) in list.iter().enumerate() {
                        for &b in &list[i + 1..] {
                            *counts.entry((a.min(b), a.max(b))).or_default() += 1;
                        }
                    }
                }
                AggregateMode::Sequential => {
                    if list.len() >= 2 {
                        *counts.entry((list[0], list[1])).or_default() += 1;
                    }
                }
            }
        }
        // BTreeMap iterates pairs ascending; keep the first maximum
        let mut best: Option<((NodeId, NodeId), u32)> = None;
        for (&pair, &c) in &counts {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((pair, c));
            }
        }
        let Some(((v1, v2), r)) = best else { break };
        if r < cfg.min_redundancy {
            break;
        }
        let w = NodeId::from_index(n + agg.len());
        agg.push([v1, v2]);
        for list in &mut lists {
            match cfg.mode {
                AggregateMode::Set => {
                    let p1 = list.iter().position(|&x| x == v1);
                    let p2 = list.iter().position(|&x| x == v2);
                    if let (Some(p1), Some(p2)) = (p1, p2) {
                        let keep = p1.min(p2);
                        list[keep] = w;
                        list.remove(p1.max(p2));
                    }
                }
                AggregateMode::Sequential => {
                    if list.len() >= 2 && list[0] == v1 && list[1] == v2 {
                        list.splice(0..2, [w]);
                    }
                }
            }
        }
        trace.records.push(IterationRecord {
            iteration: trace.records.len(),
            pair: [v1, v2],
            redundancy: r,
            node: w,
            delta_cost: -coeff.alpha * (r as f64 - 1.0),
        });
    }
    let hag = Hag::from_parts(cfg.mode, n, agg, lists).expect("rescan search yields a valid HAG");
    (hag, trace)
}
