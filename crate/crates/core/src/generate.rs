//! Synthetic graph generators used by the CLI, tests and benches.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{InputGraph, NodeId};

/// Four nodes A,B,C,D = 0,1,2,3 where A and B both aggregate {C,D} and
/// C and D both aggregate {A,B}.
pub fn diamond() -> InputGraph {
    InputGraph::from_edges(
        4,
        [(2, 0), (3, 0), (2, 1), (3, 1), (0, 2), (1, 2), (0, 3), (1, 3)],
    )
    .expect("diamond is a valid graph")
}

/// `m` consumer nodes `0..m`, each aggregating the same `n` producers
/// `m..m+n` in the same order.
pub fn share(m: usize, n: usize) -> InputGraph {
    let producers: Vec<NodeId> = (m..m + n).map(NodeId::from_index).collect();
    let mut lists = vec![producers; m];
    lists.extend(std::iter::repeat_with(Vec::new).take(n));
    InputGraph::from_in_neighbors(lists).expect("share graph is valid")
}

/// Directed Erdős–Rényi graph: each ordered pair `u != v` becomes an edge
/// `u -> v` independently with probability `p`. Neighbor lists come out in
/// ascending source order.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> InputGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lists: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    if n < 2 || p <= 0.0 {
        return InputGraph::from_in_neighbors(lists).unwrap();
    }
    // Skip-sample the n*(n-1) off-diagonal slots, ordered source-major.
    let slots = (n * (n - 1)) as u64;
    let log_q = (1.0 - p.min(1.0)).ln();
    let mut pos: u64 = 0;
    loop {
        if p < 1.0 {
            let r: f64 = rng.gen();
            let skip = ((1.0 - r).ln() / log_q).floor();
            if !skip.is_finite() || skip >= (slots - pos) as f64 {
                break;
            }
            pos += skip as u64;
        }
        if pos >= slots {
            break;
        }
        let u = (pos / (n as u64 - 1)) as usize;
        let mut v = (pos % (n as u64 - 1)) as usize;
        if v >= u {
            v += 1;
        }
        lists[v].push(NodeId::from_index(u));
        pos += 1;
    }
    InputGraph::from_in_neighbors(lists).unwrap()
}

/// Same edge set as [`erdos_renyi`] with every neighbor list shuffled, so
/// neighbor order carries no structure.
pub fn erdos_renyi_shuffled(n: usize, p: f64, seed: u64) -> InputGraph {
    let g = erdos_renyi(n, p, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut lists = g.neighbor_lists().to_vec();
    for l in &mut lists {
        l.shuffle(&mut rng);
    }
    InputGraph::from_in_neighbors(lists).unwrap()
}

/// Random ordered neighbor lists drawn from a small pool of "popular"
/// prefixes, which gives sequential aggregation plenty of shared prefixes.
pub fn prefix_heavy(n: usize, max_degree: usize, seed: u64) -> InputGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let templates: Vec<Vec<NodeId>> = (0..3)
        .map(|_| {
            let mut all: Vec<NodeId> = (0..n).map(NodeId::from_index).collect();
            all.shuffle(&mut rng);
            all.truncate(max_degree.min(n));
            all
        })
        .collect();
    let lists = (0..n)
        .map(|v| {
            let t = &templates[rng.gen_range(0..templates.len())];
            let len = rng.gen_range(0..=t.len());
            let mut list: Vec<NodeId> = t[..len]
                .iter()
                .copied()
                .filter(|u| u.index() != v)
                .collect();
            // occasionally diverge after a shared prefix
            if !list.is_empty() && rng.gen_bool(0.3) {
                let cut = rng.gen_range(0..list.len());
                list.truncate(cut);
                let extra = NodeId::from_index(rng.gen_range(0..n));
                if extra.index() != v && !list.contains(&extra) {
                    list.push(extra);
                }
            }
            list
        })
        .collect();
    InputGraph::from_in_neighbors(lists).unwrap()
}
