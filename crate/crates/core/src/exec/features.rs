use std::fmt::Debug;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ExecError;

/// Element type of activations. `i64` gives exact arithmetic for the
/// integer GCN path; `f64` is the general case.
pub trait Scalar: Copy + Send + Sync + PartialEq + PartialOrd + Debug + 'static {
    /// Integer scalars only support GCN with identity or relu.
    const EXACT: bool;

    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn mul(self, other: Self) -> Self;
    fn max(self, other: Self) -> Self;
    fn from_weight(w: f64) -> Self;
    /// Mean normalization by a neighbor count (floor division for integers).
    fn div_count(self, n: usize) -> Self;
    fn relu(self) -> Self;
    fn tanh(self) -> Self;
    fn to_f64(self) -> f64;
    fn parse(text: &str) -> Option<Self>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn max(self, other: Self) -> Self {
        f64::max(self, other)
    }
    fn from_weight(w: f64) -> Self {
        w
    }
    fn div_count(self, n: usize) -> Self {
        self / n as f64
    }
    fn relu(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn parse(text: &str) -> Option<Self> {
        text.trim().parse().ok()
    }
}

impl Scalar for i64 {
    const EXACT: bool = true;

    fn zero() -> Self {
        0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
    fn max(self, other: Self) -> Self {
        Ord::max(self, other)
    }
    fn from_weight(w: f64) -> Self {
        w.round() as i64
    }
    fn div_count(self, n: usize) -> Self {
        self.div_euclid(n as i64)
    }
    fn relu(self) -> Self {
        Ord::max(self, 0)
    }
    fn tanh(self) -> Self {
        // never reached: model validation rejects tanh on integers
        self.signum()
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn parse(text: &str) -> Option<Self> {
        text.trim().parse().ok()
    }
}

/// Row-major `rows × dim` activations, one row per node.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix<S> {
    rows: usize,
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> FeatureMatrix<S> {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        FeatureMatrix {
            rows,
            dim,
            data: vec![S::zero(); rows * dim],
        }
    }

    pub fn from_rows(rows: Vec<Vec<S>>, dim: usize) -> Result<Self, ExecError> {
        if dim == 0 {
            return Err(ExecError::Unsupported("feature dimension must be at least 1".into()));
        }
        let n = rows.len();
        let mut data = Vec::with_capacity(n * dim);
        for row in rows {
            if row.len() != dim {
                return Err(ExecError::DimMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(FeatureMatrix { rows: n, dim, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    /// Parses comma-separated rows; blank lines and `#` comments are skipped.
    pub fn from_csv(text: &str) -> Result<Self, ExecError> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|t| {
                    S::parse(t).ok_or_else(|| {
                        ExecError::Unsupported(format!("line {}: bad value {t:?}", i + 1))
                    })
                })
                .collect::<Result<Vec<S>, _>>()?;
            rows.push(row);
        }
        let dim = rows.first().map_or(1, Vec::len);
        Self::from_rows(rows, dim)
    }

    pub fn to_csv(&self) -> String
    where
        S: std::fmt::Display,
    {
        let mut out = String::new();
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

impl FeatureMatrix<f64> {
    /// Uniform values in [-1, 1).
    pub fn seeded(rows: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        FeatureMatrix { rows, dim, data }
    }
}

impl FeatureMatrix<i64> {
    /// Uniform integers in [-5, 5].
    pub fn seeded(rows: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * dim).map(|_| rng.gen_range(-5..=5)).collect();
        FeatureMatrix { rows, dim, data }
    }
}

/// Largest |a − b| / max(|a|, |b|, 1) over matching entries.
pub fn max_relative_deviation<S: Scalar>(a: &FeatureMatrix<S>, b: &FeatureMatrix<S>) -> f64 {
    assert_eq!((a.rows, a.dim), (b.rows, b.dim), "shape mismatch");
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| {
            let (x, y) = (x.to_f64(), y.to_f64());
            (x - y).abs() / x.abs().max(y.abs()).max(1.0)
        })
        .fold(0.0, f64::max)
}
