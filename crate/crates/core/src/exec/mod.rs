//! Reference forward passes: per-node aggregation over the GNN-graph, and
//! hierarchical aggregation over a HAG.
//!
//! Both passes share the message, combine and update kernels below, so on
//! an equivalent pair they perform the same arithmetic up to the grouping
//! of set aggregations. Sums over integers and maxima are insensitive to
//! grouping; sequential folds see the same order by construction.

mod features;
mod model;

use std::iter::Sum;
use std::ops::Add;

use serde::{Deserialize, Serialize};

pub use features::{max_relative_deviation, FeatureMatrix, Scalar};
pub use model::{Activation, GnnModel, LayerWeights, Matrix, ModelKind};

use model::CastMatrix;

use crate::error::ExecError;
use crate::graph::{InputGraph, NodeId};
use crate::hag::{AggregateMode, Hag};
use crate::parallel::{fill_rows, for_each_row, map_collect, Parallelism};

/// Work performed while aggregating, counted as it happens.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub binary_aggregations: u64,
    pub activation_reads: u64,
}

impl OpCounters {
    fn for_list(len: usize) -> Self {
        OpCounters {
            binary_aggregations: len.saturating_sub(1) as u64,
            activation_reads: len as u64,
        }
    }
}

impl Add for OpCounters {
    type Output = OpCounters;

    fn add(self, o: OpCounters) -> OpCounters {
        OpCounters {
            binary_aggregations: self.binary_aggregations + o.binary_aggregations,
            activation_reads: self.activation_reads + o.activation_reads,
        }
    }
}

impl Sum for OpCounters {
    fn sum<I: Iterator<Item = OpCounters>>(iter: I) -> Self {
        iter.fold(OpCounters::default(), Add::add)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerOutput<S> {
    /// `a_v` for every input node.
    pub aggregated: FeatureMatrix<S>,
    /// `h_v` after the update.
    pub hidden: FeatureMatrix<S>,
    pub counters: OpCounters,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForwardOutput<S> {
    pub layers: Vec<LayerOutput<S>>,
    /// Scalars held in the intermediate-aggregate buffer; allocated once
    /// and reused by every layer.
    pub scratch_len: usize,
}

impl<S: Scalar> ForwardOutput<S> {
    pub fn final_hidden(&self) -> Option<&FeatureMatrix<S>> {
        self.layers.last().map(|l| &l.hidden)
    }
}

/// Total runtime counters across all layers.
pub fn count_runtime_ops<S: Scalar>(out: &ForwardOutput<S>) -> OpCounters {
    out.layers.iter().map(|l| l.counters).sum()
}

/// One layer's weights converted to the execution scalar.
enum Prepared<S> {
    Gcn {
        w: CastMatrix<S>,
    },
    SagePool {
        pool: CastMatrix<S>,
        update: CastMatrix<S>,
    },
    SeqRecurrent {
        state: CastMatrix<S>,
        input: CastMatrix<S>,
        bias: Vec<S>,
        update: CastMatrix<S>,
    },
}

struct Kernel<S> {
    layer: Prepared<S>,
    activation: Activation,
    dim: usize,
}

impl<S: Scalar> Kernel<S> {
    fn new(weights: &LayerWeights, activation: Activation, dim: usize) -> Self {
        let layer = match weights {
            LayerWeights::Gcn { w } => Prepared::Gcn { w: w.cast() },
            LayerWeights::SagePool { pool, update } => Prepared::SagePool {
                pool: pool.cast(),
                update: update.cast(),
            },
            LayerWeights::SeqRecurrent {
                state,
                input,
                bias,
                update,
            } => Prepared::SeqRecurrent {
                state: state.cast(),
                input: input.cast(),
                bias: bias.iter().map(|&b| S::from_weight(b)).collect(),
                update: update.cast(),
            },
        };
        Kernel {
            layer,
            activation,
            dim,
        }
    }

    fn sequential(&self) -> bool {
        matches!(self.layer, Prepared::SeqRecurrent { .. })
    }

    /// Value a node contributes to its consumers' aggregation.
    fn message(&self, h: &[S], out: &mut [S]) {
        match &self.layer {
            Prepared::SagePool { pool, .. } => {
                pool.matvec(h, out);
                for x in out.iter_mut() {
                    *x = self.activation.apply(*x);
                }
            }
            _ => out.copy_from_slice(h),
        }
    }

    /// Set combine: `acc ← acc ⊕ x`.
    fn combine(&self, acc: &mut [S], x: &[S]) {
        match &self.layer {
            Prepared::SagePool { .. } => {
                for (a, &b) in acc.iter_mut().zip(x) {
                    *a = a.max(b);
                }
            }
            _ => {
                for (a, &b) in acc.iter_mut().zip(x) {
                    *a = a.add(b);
                }
            }
        }
    }

    /// Recurrent step: `tanh(W_s·state + W_x·x + b)`.
    fn step(&self, state: &[S], x: &[S], out: &mut [S]) {
        let Prepared::SeqRecurrent {
            state: ws,
            input: wx,
            bias,
            ..
        } = &self.layer
        else {
            unreachable!("step on a set model")
        };
        let mut tmp = vec![S::zero(); self.dim];
        ws.matvec(state, out);
        wx.matvec(x, &mut tmp);
        for ((o, t), b) in out.iter_mut().zip(&tmp).zip(bias) {
            *o = o.add(*t).add(*b).tanh();
        }
    }

    fn update(&self, a: &[S], h: &[S], num_neighbors: usize, out: &mut [S]) {
        match &self.layer {
            Prepared::Gcn { w } => {
                let mean: Vec<S> = a
                    .iter()
                    .zip(h)
                    .map(|(&x, &y)| x.add(y).div_count(num_neighbors + 1))
                    .collect();
                w.matvec(&mean, out);
            }
            Prepared::SagePool { update, .. } | Prepared::SeqRecurrent { update, .. } => {
                update.matvec2(a, h, out);
            }
        }
        for x in out.iter_mut() {
            *x = self.activation.apply(*x);
        }
    }

    /// Aggregates `rows` in order. An empty list yields zeros (the initial
    /// recurrent state in sequential mode).
    fn aggregate_rows<'a>(&self, mut rows: impl Iterator<Item = &'a [S]>, out: &mut [S]) {
        if self.sequential() {
            out.fill(S::zero());
            let mut next = vec![S::zero(); self.dim];
            for x in rows {
                self.step(out, x, &mut next);
                out.copy_from_slice(&next);
            }
        } else {
            match rows.next() {
                None => out.fill(S::zero()),
                Some(first) => {
                    out.copy_from_slice(first);
                    for x in rows {
                        self.combine(out, x);
                    }
                }
            }
        }
    }

    /// Aggregates a HAG in-neighbor list over the value buffer. In
    /// sequential mode an aggregation node at the head supplies the
    /// recurrent state for its prefix.
    fn aggregate_hag(&self, list: &[NodeId], buf: &[S], num_inputs: usize, out: &mut [S]) {
        let d = self.dim;
        let row = |u: NodeId| &buf[u.index() * d..(u.index() + 1) * d];
        match list.first() {
            Some(&head) if self.sequential() && head.index() >= num_inputs => {
                out.copy_from_slice(row(head));
                let mut next = vec![S::zero(); d];
                for &u in &list[1..] {
                    self.step(out, row(u), &mut next);
                    out.copy_from_slice(&next);
                }
            }
            _ => self.aggregate_rows(list.iter().map(|&u| row(u)), out),
        }
    }
}

fn check_inputs<S: Scalar>(
    model: &GnnModel,
    num_nodes: usize,
    x: &FeatureMatrix<S>,
) -> Result<(), ExecError> {
    model.validate::<S>()?;
    if x.rows() != num_nodes {
        return Err(ExecError::RowMismatch {
            rows: x.rows(),
            nodes: num_nodes,
        });
    }
    if x.dim() != model.dim {
        return Err(ExecError::DimMismatch {
            expected: model.dim,
            found: x.dim(),
        });
    }
    Ok(())
}

/// Layer-by-layer evaluation on the GNN-graph: every node aggregates its
/// own neighbor list from scratch.
pub fn forward_gnn_graph<S: Scalar>(
    g: &InputGraph,
    model: &GnnModel,
    x: &FeatureMatrix<S>,
    par: Parallelism,
) -> Result<ForwardOutput<S>, ExecError> {
    check_inputs(model, g.num_nodes(), x)?;
    let (n, d) = (g.num_nodes(), model.dim);
    let mut h = x.clone();
    let mut layers = Vec::with_capacity(model.num_layers());
    for weights in &model.layers {
        let kernel = Kernel::<S>::new(weights, model.activation, d);
        let mut messages = FeatureMatrix::zeros(n, d);
        if n > 0 {
            fill_rows(par, messages.as_mut_slice(), d, |v, row| {
                kernel.message(h.row(v), row);
            });
        }
        let mut aggregated = FeatureMatrix::zeros(n, d);
        let counters = if n > 0 {
            for_each_row(par, aggregated.as_mut_slice(), d, |v, row| {
                let list = g.in_neighbors(NodeId::from_index(v));
                kernel.aggregate_rows(list.iter().map(|u| messages.row(u.index())), row);
                OpCounters::for_list(list.len())
            })
        } else {
            OpCounters::default()
        };
        let mut hidden = FeatureMatrix::zeros(n, d);
        if n > 0 {
            fill_rows(par, hidden.as_mut_slice(), d, |v, row| {
                let deg = g.in_neighbors(NodeId::from_index(v)).len();
                kernel.update(aggregated.row(v), h.row(v), deg, row);
            });
        }
        h = hidden.clone();
        layers.push(LayerOutput {
            aggregated,
            hidden,
            counters,
        });
    }
    Ok(ForwardOutput {
        layers,
        scratch_len: 0,
    })
}

/// Layer-by-layer evaluation on a HAG: aggregation nodes are computed first,
/// level by level, then input nodes aggregate their (shorter) lists.
pub fn forward_hag<S: Scalar>(
    hag: &Hag,
    model: &GnnModel,
    x: &FeatureMatrix<S>,
    par: Parallelism,
) -> Result<ForwardOutput<S>, ExecError> {
    let n = hag.num_input_nodes();
    check_inputs(model, n, x)?;
    if model.kind.mode() == AggregateMode::Sequential {
        if hag.mode() != AggregateMode::Sequential {
            return Err(ExecError::Unsupported(
                "an order-sensitive model needs a sequential-mode HAG".into(),
            ));
        }
        check_prefix_shape(hag)?;
    }
    let d = model.dim;
    let degrees = cover_sizes(hag);
    let levels = hag.agg_levels();

    // Intermediate values for V ∪ V_A, shared by all layers.
    let mut buf = vec![S::zero(); hag.num_nodes() * d];
    let mut h = x.clone();
    let mut layers = Vec::with_capacity(model.num_layers());
    for weights in &model.layers {
        let kernel = Kernel::<S>::new(weights, model.activation, d);
        let mut counters = OpCounters::default();
        if n > 0 {
            fill_rows(par, &mut buf[..n * d], d, |v, row| {
                kernel.message(h.row(v), row);
            });
        }
        for level in &levels {
            let computed = map_collect(par, level, |&w| {
                let mut row = vec![S::zero(); d];
                let list = hag.in_neighbors(w);
                kernel.aggregate_hag(list, &buf, n, &mut row);
                (row, OpCounters::for_list(list.len()))
            });
            for (&w, (row, c)) in level.iter().zip(computed) {
                buf[w.index() * d..(w.index() + 1) * d].copy_from_slice(&row);
                counters = counters + c;
            }
        }
        let mut aggregated = FeatureMatrix::zeros(n, d);
        if n > 0 {
            counters = counters
                + for_each_row(par, aggregated.as_mut_slice(), d, |v, row| {
                    let list = hag.in_neighbors(NodeId::from_index(v));
                    kernel.aggregate_hag(list, &buf, n, row);
                    OpCounters::for_list(list.len())
                });
        }
        let mut hidden = FeatureMatrix::zeros(n, d);
        if n > 0 {
            fill_rows(par, hidden.as_mut_slice(), d, |v, row| {
                kernel.update(aggregated.row(v), h.row(v), degrees[v], row);
            });
        }
        h = hidden.clone();
        layers.push(LayerOutput {
            aggregated,
            hidden,
            counters,
        });
    }
    Ok(ForwardOutput {
        layers,
        scratch_len: buf.len(),
    })
}

/// |cover(v)| for every input node.
fn cover_sizes(hag: &Hag) -> Vec<usize> {
    let n = hag.num_input_nodes();
    let mut sizes = vec![0usize; hag.num_agg_nodes()];
    let size = |sizes: &[usize], u: &NodeId| if u.index() >= n { sizes[u.index() - n] } else { 1 };
    for w in hag.agg_topo_order() {
        let s = hag.in_neighbors(w).iter().map(|u| size(&sizes, u)).sum();
        sizes[w.index() - n] = s;
    }
    hag.input_in_neighbors()
        .iter()
        .map(|l| l.iter().map(|u| size(&sizes, u)).sum())
        .collect()
}

/// A recurrent fold can only resume from a stored prefix: aggregation
/// nodes may appear only at the head of a list.
fn check_prefix_shape(hag: &Hag) -> Result<(), ExecError> {
    let n = hag.num_input_nodes();
    let lists = hag
        .agg_nodes()
        .iter()
        .map(|p| p.as_slice())
        .chain(hag.input_in_neighbors().iter().map(Vec::as_slice));
    for list in lists {
        if list.iter().skip(1).any(|u| u.index() >= n) {
            return Err(ExecError::Unsupported(
                "sequential aggregation needs aggregation nodes at list heads only".into(),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    fn two_merge() -> Hag {
        Hag::from_parts(
            AggregateMode::Set,
            4,
            vec![[NodeId(2), NodeId(3)], [NodeId(0), NodeId(1)]],
            vec![ids(&[4]), ids(&[4]), ids(&[5]), ids(&[5])],
        )
        .unwrap()
    }

    fn unit_gcn(layers: usize) -> GnnModel {
        GnnModel {
            kind: ModelKind::Gcn,
            activation: Activation::Identity,
            dim: 1,
            layers: vec![LayerWeights::Gcn { w: Matrix::identity(1) }; layers],
        }
    }

    #[test]
    fn diamond_gcn_by_hand() {
        let g = generate::diamond();
        let x = FeatureMatrix::from_rows(vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]], 1).unwrap();
        let out = forward_gnn_graph(&g, &unit_gcn(1), &x, Parallelism::Sequential).unwrap();
        assert_eq!(out.layers[0].aggregated.as_slice(), &[7.0, 7.0, 3.0, 3.0]);
        let h = out.layers[0].hidden.as_slice();
        for (got, want) in h.iter().zip([8.0 / 3.0, 9.0 / 3.0, 6.0 / 3.0, 7.0 / 3.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn diamond_integer_hag_matches_reference() {
        let g = generate::diamond();
        let x = FeatureMatrix::<i64>::from_rows(vec![vec![1], vec![2], vec![3], vec![4]], 1).unwrap();
        let model = unit_gcn(1);
        let flat = forward_gnn_graph(&g, &model, &x, Parallelism::Sequential).unwrap();
        let hag = forward_hag(&two_merge(), &model, &x, Parallelism::Parallel).unwrap();
        assert_eq!(hag.layers[0].aggregated.as_slice(), &[7, 7, 3, 3]);
        assert_eq!(flat.layers, hag.layers.iter().map(|l| LayerOutput {
            counters: flat.layers[0].counters,
            ..l.clone()
        }).collect::<Vec<_>>());
        assert_eq!(count_runtime_ops(&flat).binary_aggregations, 4);
        assert_eq!(count_runtime_ops(&hag).binary_aggregations, 2);
        assert_eq!(count_runtime_ops(&hag).activation_reads, 8);
    }

    #[test]
    fn counters_scale_with_layers() {
        let model = unit_gcn(2);
        let x = FeatureMatrix::<f64>::seeded(4, 1, 1);
        let out = forward_hag(&two_merge(), &model, &x, Parallelism::Sequential).unwrap();
        assert_eq!(count_runtime_ops(&out).binary_aggregations, 4);
        assert_eq!(count_runtime_ops(&out).activation_reads, 16);
    }

    #[test]
    fn sage_pool_takes_max() {
        let g = generate::diamond();
        let model = GnnModel {
            kind: ModelKind::SagePool,
            activation: Activation::Identity,
            dim: 1,
            layers: vec![LayerWeights::SagePool {
                pool: Matrix::identity(1),
                update: Matrix::hstack(&Matrix::identity(1), &Matrix::identity(1)),
            }],
        };
        let x = FeatureMatrix::from_rows(vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]], 1).unwrap();
        let out = forward_gnn_graph(&g, &model, &x, Parallelism::Sequential).unwrap();
        assert_eq!(out.layers[0].aggregated.row(0), &[4.0]);
        let hagged = forward_hag(&two_merge(), &model, &x, Parallelism::Sequential).unwrap();
        assert_eq!(out.layers[0].hidden, hagged.layers[0].hidden);
    }

    #[test]
    fn isolated_node_gets_zero_aggregate() {
        let g = InputGraph::empty(2);
        for kind in [ModelKind::Gcn, ModelKind::SagePool, ModelKind::SeqRecurrent] {
            let model = GnnModel::seeded(kind, 3, 1, Activation::Tanh, 4, false);
            let x = FeatureMatrix::<f64>::seeded(2, 3, 5);
            let out = forward_gnn_graph(&g, &model, &x, Parallelism::Sequential).unwrap();
            assert!(out.layers[0].aggregated.as_slice().iter().all(|&v| v == 0.0));
            let mut expected = vec![0.0; 3];
            let kernel = Kernel::<f64>::new(&model.layers[0], model.activation, 3);
            kernel.update(&[0.0; 3], x.row(1), 0, &mut expected);
            assert_eq!(out.layers[0].hidden.row(1), expected.as_slice());
        }
    }

    #[test]
    fn sequential_prefix_state_is_reused_verbatim() {
        // A = [C, D, B], B = [C, D]; w = [C, D] shared
        let g = InputGraph::from_in_neighbors(vec![ids(&[2, 3, 1]), ids(&[2, 3]), vec![], vec![]]).unwrap();
        let hag = Hag::from_parts(
            AggregateMode::Sequential,
            4,
            vec![[NodeId(2), NodeId(3)]],
            vec![ids(&[4, 1]), ids(&[4]), vec![], vec![]],
        )
        .unwrap();
        let model = GnnModel::seeded(ModelKind::SeqRecurrent, 4, 2, Activation::Tanh, 3, false);
        let x = FeatureMatrix::<f64>::seeded(4, 4, 8);
        let flat = forward_gnn_graph(&g, &model, &x, Parallelism::Sequential).unwrap();
        let hagged = forward_hag(&hag, &model, &x, Parallelism::Parallel).unwrap();
        for (a, b) in flat.layers.iter().zip(&hagged.layers) {
            assert_eq!(a.aggregated, b.aggregated);
            assert_eq!(a.hidden, b.hidden);
        }
        assert_eq!(count_runtime_ops(&flat).binary_aggregations, 2 * 3);
        assert_eq!(count_runtime_ops(&hagged).binary_aggregations, 2 * 2);
    }

    #[test]
    fn sequential_rejects_agg_off_the_head() {
        let hag = Hag::from_parts(
            AggregateMode::Sequential,
            4,
            vec![[NodeId(2), NodeId(3)]],
            vec![ids(&[1, 4]), vec![], vec![], vec![]],
        )
        .unwrap();
        let model = GnnModel::seeded(ModelKind::SeqRecurrent, 2, 1, Activation::Tanh, 3, false);
        let x = FeatureMatrix::<f64>::seeded(4, 2, 8);
        assert!(matches!(
            forward_hag(&hag, &model, &x, Parallelism::Sequential),
            Err(ExecError::Unsupported(_))
        ));
    }

    #[test]
    fn shape_errors() {
        let g = generate::diamond();
        let model = GnnModel::seeded(ModelKind::Gcn, 2, 1, Activation::Relu, 1, false);
        let wrong_rows = FeatureMatrix::<f64>::seeded(3, 2, 1);
        assert!(matches!(
            forward_gnn_graph(&g, &model, &wrong_rows, Parallelism::Sequential),
            Err(ExecError::RowMismatch { .. })
        ));
        let wrong_dim = FeatureMatrix::<f64>::seeded(4, 3, 1);
        assert!(matches!(
            forward_hag(&two_merge(), &model, &wrong_dim, Parallelism::Sequential),
            Err(ExecError::DimMismatch { .. })
        ));
    }

    #[test]
    fn scratch_size_independent_of_depth() {
        let x = FeatureMatrix::<f64>::seeded(4, 3, 2);
        let sizes: Vec<usize> = [1, 2, 5]
            .iter()
            .map(|&k| {
                let model = GnnModel::seeded(ModelKind::Gcn, 3, k, Activation::Relu, 1, false);
                forward_hag(&two_merge(), &model, &x, Parallelism::Sequential)
                    .unwrap()
                    .scratch_len
            })
            .collect();
        assert_eq!(sizes, vec![6 * 3; 3]);
    }

    #[test]
    fn empty_graph_runs() {
        let g = InputGraph::empty(0);
        let model = GnnModel::seeded(ModelKind::Gcn, 2, 2, Activation::Relu, 1, false);
        let x = FeatureMatrix::<f64>::zeros(0, 2);
        let out = forward_gnn_graph(&g, &model, &x, Parallelism::Parallel).unwrap();
        assert_eq!(out.final_hidden().unwrap().rows(), 0);
        let hag = forward_hag(&Hag::trivial(&g, AggregateMode::Set), &model, &x, Parallelism::Parallel).unwrap();
        assert_eq!(count_runtime_ops(&hag), OpCounters::default());
    }
}
