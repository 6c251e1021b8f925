use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::Scalar;
use crate::error::ExecError;
use crate::hag::AggregateMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Sum aggregate, mean-normalized update.
    Gcn,
    /// Element-wise max over transformed neighbors.
    SagePool,
    /// Ordered recurrent fold over neighbors.
    SeqRecurrent,
}

impl ModelKind {
    pub fn mode(self) -> AggregateMode {
        match self {
            ModelKind::Gcn | ModelKind::SagePool => AggregateMode::Set,
            ModelKind::SeqRecurrent => AggregateMode::Sequential,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.relu(),
            Activation::Tanh => x.tanh(),
        }
    }
}

/// Dense row-major weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl Matrix {
    pub fn identity(n: usize) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        Matrix {
            rows: n,
            cols: n,
            values,
        }
    }

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng, integer: bool) -> Self {
        let values = (0..rows * cols)
            .map(|_| {
                if integer {
                    rng.gen_range(-1i32..=1) as f64
                } else {
                    rng.gen_range(-0.5..=0.5)
                }
            })
            .collect();
        Matrix { rows, cols, values }
    }

    /// `[A | B]` stacked side by side.
    pub fn hstack(a: &Matrix, b: &Matrix) -> Self {
        assert_eq!(a.rows, b.rows);
        let cols = a.cols + b.cols;
        let mut values = Vec::with_capacity(a.rows * cols);
        for r in 0..a.rows {
            values.extend_from_slice(&a.values[r * a.cols..(r + 1) * a.cols]);
            values.extend_from_slice(&b.values[r * b.cols..(r + 1) * b.cols]);
        }
        Matrix {
            rows: a.rows,
            cols,
            values,
        }
    }

    pub(crate) fn cast<S: Scalar>(&self) -> CastMatrix<S> {
        CastMatrix {
            cols: self.cols,
            values: self.values.iter().map(|&w| S::from_weight(w)).collect(),
        }
    }
}

/// Weights converted to the execution scalar once per pass.
pub(crate) struct CastMatrix<S> {
    cols: usize,
    values: Vec<S>,
}

impl<S: Scalar> CastMatrix<S> {
    /// `out[i] = Σ_j W[i][j] · x[j]`, with `x` split into `x1 ++ x2`.
    pub fn matvec2(&self, x1: &[S], x2: &[S], out: &mut [S]) {
        debug_assert_eq!(x1.len() + x2.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.values[i * self.cols..(i + 1) * self.cols];
            let mut acc = S::zero();
            for (w, x) in row.iter().zip(x1.iter().chain(x2)) {
                acc = acc.add(w.mul(*x));
            }
            *o = acc;
        }
    }

    pub fn matvec(&self, x: &[S], out: &mut [S]) {
        self.matvec2(x, &[], out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LayerWeights {
    Gcn {
        w: Matrix,
    },
    SagePool {
        pool: Matrix,
        /// Applied to `(a, h)`, shape `d × 2d`.
        update: Matrix,
    },
    SeqRecurrent {
        state: Matrix,
        input: Matrix,
        bias: Vec<f64>,
        /// Applied to `(a, h)`, shape `d × 2d`.
        update: Matrix,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GnnModel {
    pub kind: ModelKind,
    pub activation: Activation,
    pub dim: usize,
    pub layers: Vec<LayerWeights>,
}

impl GnnModel {
    /// Weights drawn uniformly from [-0.5, 0.5], or from {-1, 0, 1} when
    /// `integer` is set.
    pub fn seeded(
        kind: ModelKind,
        dim: usize,
        num_layers: usize,
        activation: Activation,
        seed: u64,
        integer: bool,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = (0..num_layers)
            .map(|_| match kind {
                ModelKind::Gcn => LayerWeights::Gcn {
                    w: Matrix::random(dim, dim, &mut rng, integer),
                },
                ModelKind::SagePool => LayerWeights::SagePool {
                    pool: Matrix::random(dim, dim, &mut rng, integer),
                    update: Matrix::random(dim, 2 * dim, &mut rng, integer),
                },
                ModelKind::SeqRecurrent => LayerWeights::SeqRecurrent {
                    state: Matrix::random(dim, dim, &mut rng, integer),
                    input: Matrix::random(dim, dim, &mut rng, integer),
                    bias: Matrix::random(dim, 1, &mut rng, integer).values,
                    update: Matrix::random(dim, 2 * dim, &mut rng, integer),
                },
            })
            .collect();
        GnnModel {
            kind,
            activation,
            dim,
            layers,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub(crate) fn validate<S: Scalar>(&self) -> Result<(), ExecError> {
        if self.dim == 0 {
            return Err(ExecError::Unsupported("model dimension must be at least 1".into()));
        }
        if S::EXACT && (self.kind != ModelKind::Gcn || self.activation == Activation::Tanh) {
            return Err(ExecError::Unsupported(
                "integer execution supports only GCN with identity or relu".into(),
            ));
        }
        let d = self.dim;
        let shape_ok = |m: &Matrix, r: usize, c: usize| m.rows == r && m.cols == c && m.values.len() == r * c;
        for layer in &self.layers {
            let ok = match (self.kind, layer) {
                (ModelKind::Gcn, LayerWeights::Gcn { w }) => shape_ok(w, d, d),
                (ModelKind::SagePool, LayerWeights::SagePool { pool, update }) => {
                    shape_ok(pool, d, d) && shape_ok(update, d, 2 * d)
                }
                (
                    ModelKind::SeqRecurrent,
                    LayerWeights::SeqRecurrent {
                        state,
                        input,
                        bias,
                        update,
                    },
                ) => shape_ok(state, d, d) && shape_ok(input, d, d) && bias.len() == d && shape_ok(update, d, 2 * d),
                _ => false,
            };
            if !ok {
                return Err(ExecError::Unsupported(format!(
                    "layer weights do not match a {:?} model of dimension {d}",
                    self.kind
                )));
            }
        }
        Ok(())
    }
}
