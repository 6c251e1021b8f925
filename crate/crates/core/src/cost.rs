//! Per-layer cost of evaluating a HAG, and the aggregation/transfer counters.
//!
//! `cost = α·(|Ê| − |V_A|) + (β − α)·|V|`, where `α` is the price of one
//! binary aggregate and `β` the price of one update.

use serde::{Deserialize, Serialize};

use crate::graph::InputGraph;
use crate::hag::{AggregateMode, Hag};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostCoefficients {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for CostCoefficients {
    fn default() -> Self {
        CostCoefficients {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

impl CostCoefficients {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, String> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(format!("alpha must be positive, got {alpha}"));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(format!("beta must be non-negative, got {beta}"));
        }
        Ok(CostCoefficients { alpha, beta })
    }

    /// Cost of a HAG shape given only its counts.
    pub fn cost_of(&self, num_edges: usize, num_agg_nodes: usize, num_input_nodes: usize) -> f64 {
        self.alpha * (num_edges as f64 - num_agg_nodes as f64)
            + (self.beta - self.alpha) * num_input_nodes as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// Σ over V ∪ V_A of max(|N̂_v| − 1, 0).
    pub num_aggregations: usize,
    /// Activation vectors read while aggregating; one per in-edge.
    pub num_transfers: usize,
    pub cost_value: f64,
    /// Cost of the plain GNN-graph minus `cost_value`.
    pub savings_f: f64,
    pub num_agg_nodes: usize,
    pub num_edges: usize,
}

pub fn num_aggregations(h: &Hag) -> usize {
    let agg: usize = h.agg_nodes().len();
    let input: usize = h
        .input_in_neighbors()
        .iter()
        .map(|l| l.len().saturating_sub(1))
        .sum();
    agg + input
}

/// Evaluates the cost of `h`. `savings_f` is measured against the trivial
/// HAG with the same input edges, i.e. assuming `h` is equivalent to its
/// source graph.
pub fn evaluate_cost(h: &Hag, coeff: CostCoefficients) -> CostReport {
    let num_edges = h.num_edges();
    let num_agg_nodes = h.num_agg_nodes();
    let cost_value = coeff.cost_of(num_edges, num_agg_nodes, h.num_input_nodes());
    // An equivalent HAG has |E| = Σ|cover(v)| = Σ over inputs of the
    // flattened list lengths.
    let original_edges = original_edge_count(h);
    let baseline = coeff.cost_of(original_edges, 0, h.num_input_nodes());
    CostReport {
        num_aggregations: num_aggregations(h),
        num_transfers: num_edges,
        cost_value,
        savings_f: baseline - cost_value,
        num_agg_nodes,
        num_edges,
    }
}

/// f(Ĝ) = cost(G) − cost(Ĝ) = α·(|E| − |Ê| + |V_A|).
pub fn savings(g: &InputGraph, h: &Hag, coeff: CostCoefficients) -> f64 {
    coeff.alpha * (g.num_edges() as f64 - h.num_edges() as f64 + h.num_agg_nodes() as f64)
}

fn original_edge_count(h: &Hag) -> usize {
    let n = h.num_input_nodes();
    let mut sizes = vec![0usize; h.num_agg_nodes()];
    for w in h.agg_topo_order() {
        let i = w.index() - n;
        sizes[i] = h.agg_nodes()[i]
            .iter()
            .map(|u| if u.index() >= n { sizes[u.index() - n] } else { 1 })
            .sum();
    }
    h.input_in_neighbors()
        .iter()
        .flatten()
        .map(|u| if u.index() >= n { sizes[u.index() - n] } else { 1 })
        .sum()
}

pub const CSV_HEADER: &str = "graph,mode,capacity,edges,agg_nodes,aggregations,transfers,cost,savings";

impl CostReport {
    pub fn csv_row(&self, graph: &str, mode: AggregateMode, capacity: usize) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            graph,
            mode.as_str(),
            capacity,
            self.num_edges,
            self.num_agg_nodes,
            self.num_aggregations,
            self.num_transfers,
            fmt_num(self.cost_value),
            fmt_num(self.savings_f)
        )
    }
}

/// Integral values print without a fractional part.
fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
