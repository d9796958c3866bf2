//! Lazy-walk transition matrices and the global time-respecting transition
//! operator.
//!
//! For snapshot `t` with adjacency `W_t` and strengths `D_t = diag(W_t 1)`,
//! the lazy transition matrix is `L_t = (D_t + I)^-1 (W_t + I)`: a walker
//! stays put with probability `1 / (s_i + 1)` and otherwise follows an edge
//! proportionally to its weight. The global operator averages the products
//! `L_tau L_{tau+1} ... L_T` over the `T` possible start times, i.e. over
//! walks of uniformly random length `1..=T` that all end at the last snapshot.
//!
//! The operator can be kept lazy (a list of sparse factors, applied to `n x d`
//! blocks right to left) or materialized as a dense `n x n` matrix.

use ndarray::parallel::prelude::*;
use ndarray::{Array2, ArrayView2, ArrayViewMut2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Snapshot, TemporalGraph};

/// Largest `n` for which a dense `P` is built unless the caller overrides it.
pub const DEFAULT_DENSE_CAP: usize = 8192;

/// Row-stochastic lazy transition matrix of one snapshot.
#[derive(Debug, Clone)]
pub struct SnapshotTransition {
    adjacency: Snapshot,
    inv_strength: Vec<f64>,
}

impl SnapshotTransition {
    pub fn new(w: &Snapshot) -> Result<Self> {
        let n = w.n();
        let mut inv_strength = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = 0.0;
            for (_, wij) in w.row(i) {
                if wij < 0.0 {
                    return Err(Error::InvalidGraph(format!("negative weight {wij} at row {i}")));
                }
                s += wij;
            }
            inv_strength.push(1.0 / (s + 1.0));
        }
        Ok(Self {
            adjacency: w.clone(),
            inv_strength,
        })
    }

    pub fn n(&self) -> usize {
        self.inv_strength.len()
    }

    /// Whether the matrix is the identity (no edges).
    pub fn is_identity(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn nnz(&self) -> usize {
        2 * self.adjacency.edge_count() + self.n()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.inv_strength[i]
        } else {
            self.adjacency.weight(i, j) * self.inv_strength[i]
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.n();
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            a[[i, i]] = self.inv_strength[i];
            for (j, w) in self.adjacency.row(i) {
                a[[i, j]] = w * self.inv_strength[i];
            }
        }
        a
    }

    /// `out = L m`.
    fn mul_into(&self, m: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) {
        let (indptr, indices, weights) = self.adjacency.csr();
        let inv = &self.inv_strength;
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut row)| {
                row.assign(&m.row(i));
                for k in indptr[i]..indptr[i + 1] {
                    row.scaled_add(weights[k], &m.row(indices[k]));
                }
                row *= inv[i];
            });
    }

    /// `out = L^T m = (W + I) (D + I)^-1 m`.
    fn mul_transpose_into(&self, m: ArrayView2<f64>, mut out: ArrayViewMut2<f64>) {
        let (indptr, indices, weights) = self.adjacency.csr();
        let inv = &self.inv_strength;
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut row)| {
                row.assign(&m.row(i));
                row *= inv[i];
                for k in indptr[i]..indptr[i + 1] {
                    let j = indices[k];
                    row.scaled_add(weights[k] * inv[j], &m.row(j));
                }
            });
    }
}

/// How the global operator is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorMode {
    /// Dense when `n^2 <= E`, lazy otherwise.
    #[default]
    Auto,
    Lazy,
    Materialized,
}

impl std::str::FromStr for OperatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "lazy" => Ok(Self::Lazy),
            "materialized" | "dense" => Ok(Self::Materialized),
            _ => Err(Error::InvalidArgument(format!("unknown operator mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Lazy(Vec<SnapshotTransition>),
    Dense(Array2<f64>),
}

/// The global transition operator `P`.
#[derive(Debug, Clone)]
pub struct GlobalTransitionOperator {
    n: usize,
    t: usize,
    repr: Repr,
}

impl GlobalTransitionOperator {
    /// Builds the operator for `g` with the default dense cap.
    pub fn build(g: &TemporalGraph, mode: OperatorMode) -> Result<Self> {
        Self::build_with_cap(g, mode, DEFAULT_DENSE_CAP)
    }

    pub fn build_with_cap(g: &TemporalGraph, mode: OperatorMode, dense_cap: usize) -> Result<Self> {
        let factors = g
            .snapshots()
            .iter()
            .map(SnapshotTransition::new)
            .collect::<Result<Vec<_>>>()?;
        let lazy = Self {
            n: g.n(),
            t: g.num_snapshots(),
            repr: Repr::Lazy(factors),
        };
        let n = g.n();
        let dense = match mode {
            OperatorMode::Lazy => false,
            OperatorMode::Materialized => true,
            OperatorMode::Auto => n * n <= g.temporal_edge_count() && n <= dense_cap,
        };
        if dense {
            let p = lazy.materialize_with_cap(dense_cap)?;
            Ok(Self {
                repr: Repr::Dense(p),
                ..lazy
            })
        } else {
            Ok(lazy)
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_snapshots(&self) -> usize {
        self.t
    }

    pub fn mode(&self) -> OperatorMode {
        match self.repr {
            Repr::Lazy(_) => OperatorMode::Lazy,
            Repr::Dense(_) => OperatorMode::Materialized,
        }
    }

    fn check_rows(&self, m: &ArrayView2<f64>) -> Result<()> {
        if m.nrows() != self.n {
            return Err(Error::Dimension(format!(
                "operator has n = {} but matrix has {} rows",
                self.n,
                m.nrows()
            )));
        }
        Ok(())
    }

    /// Returns `P m`.
    ///
    /// The lazy form walks the factors from the last snapshot backwards,
    /// `Y <- L_tau Y`, summing every partial product, then divides by `T`.
    pub fn apply(&self, m: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_rows(&m)?;
        match &self.repr {
            Repr::Dense(p) => Ok(p.dot(&m)),
            Repr::Lazy(factors) => Ok(self.accumulate(m, factors.iter().rev())),
        }
    }

    /// Returns `P^T m`.
    ///
    /// The lazy form runs forward in time with `Z <- L_tau^T (Z + m)`, so that
    /// after the last snapshot `Z` holds every product `L_T^T ... L_tau^T m`.
    pub fn apply_transpose(&self, m: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_rows(&m)?;
        match &self.repr {
            Repr::Dense(p) => Ok(p.t().dot(&m)),
            Repr::Lazy(factors) => {
                let mut z = Array2::zeros(m.raw_dim());
                let mut next = Array2::zeros(m.raw_dim());
                for f in factors {
                    z += &m;
                    if !f.is_identity() {
                        f.mul_transpose_into(z.view(), next.view_mut());
                        std::mem::swap(&mut z, &mut next);
                    }
                }
                let scale = 1.0 / self.t as f64;
                z.mapv_inplace(|v| v * scale);
                Ok(z)
            }
        }
    }

    fn accumulate<'a, I>(&self, m: ArrayView2<f64>, factors: I) -> Array2<f64>
    where
        I: Iterator<Item = &'a SnapshotTransition>,
    {
        let mut y = m.to_owned();
        let mut next = Array2::zeros(m.raw_dim());
        let mut acc = Array2::zeros(m.raw_dim());
        for f in factors {
            if !f.is_identity() {
                f.mul_into(y.view(), next.view_mut());
                std::mem::swap(&mut y, &mut next);
            }
            acc += &y;
        }
        let scale = 1.0 / self.t as f64;
        acc.mapv_inplace(|v| v * scale);
        acc
    }

    /// Dense `P`, refusing when `n` exceeds [`DEFAULT_DENSE_CAP`].
    pub fn materialize(&self) -> Result<Array2<f64>> {
        self.materialize_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn materialize_with_cap(&self, cap: usize) -> Result<Array2<f64>> {
        match &self.repr {
            Repr::Dense(p) => Ok(p.clone()),
            Repr::Lazy(_) => {
                if self.n > cap {
                    return Err(Error::MaterializeCap { n: self.n, cap });
                }
                self.apply(Array2::eye(self.n).view())
            }
        }
    }

    /// `P 1`, which equals the all-ones vector up to round-off.
    pub fn row_sums(&self) -> Vec<f64> {
        let ones = Array2::ones((self.n, 1));
        self.apply(ones.view())
            .expect("shape matches")
            .column(0)
            .to_vec()
    }
}
