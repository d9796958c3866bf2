//! Node embeddings from the global transition operator.
//!
//! Each node `i` gets a unit vector `x_i` in `R^d`. The embedding minimizes
//!
//! ```text
//! L(X) = - sum_ij P_ij log Q_ij(X) + |sum_i x_i|^2 / n,
//! Q_ij = exp(x_i . x_j) / Z_i,     Z_i = sum_k exp(x_i . x_k),
//! ```
//!
//! the cross entropy between the rows of `P` and softmax similarities of the
//! embedding, plus a penalty on the mean embedding vector. Because the rows of
//! `P` are probability distributions the cross-entropy term can be written as
//! `sum_i r_i log Z_i - sum_i x_i . (P X)_i` with `r = P 1`, so the loss and
//! its gradient only ever need `P X` and `P^T X`.
//!
//! `Z_i` is either summed exactly (`O(n^2 d)`) or estimated from a Gaussian
//! mixture summary of the embedding cloud: nodes are split into `q` groups
//! with sizes `pi_a`, means `mu_a` and covariances `Omega_a`, and
//! `Z_i ~ sum_a pi_a exp(x_i . mu_a + x_i^T Omega_a x_i / 2)`, which costs
//! `O(n q d^2)`.
//!
//! # Gradient
//!
//! With `s_ij = x_i . x_j` and `a_i = r_i / Z_i`:
//!
//! ```text
//! dL/dx_k = -(P X)_k - (P^T X)_k                       (linear term)
//!           + sum_j exp(s_kj) (a_k + a_j) x_j          (exact log Z)
//!           + (2 / n) sum_j x_j                        (regularizer)
//! ```
//!
//! For the mixture estimate the `log Z` part is differentiated through the
//! group statistics as well (group membership is held fixed). With
//! `w_ia = pi_a exp(g_ia) / Z_i`, `A_a = sum_i r_i w_ia x_i` and
//! `B_a = 1/2 sum_i r_i w_ia x_i x_i^T`, node `k` in group `a` receives
//!
//! ```text
//! r_k sum_b w_kb (mu_b + Omega_b x_k) + A_a / pi_a + (2 / pi_a) B_a (x_k - mu_a).
//! ```

use ndarray::parallel::prelude::*;
use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::kmeans::{KMeans, KMeansConfig};
use crate::graph::TemporalGraph;
use crate::transition::{GlobalTransitionOperator, OperatorMode, DEFAULT_DENSE_CAP};

/// Above this many nodes the automatic mode switches to the mixture estimate.
pub const EXACT_Z_MAX_NODES: usize = 2000;

const ROW_BLOCK: usize = 256;
const UNIT_NORM_TOL: f64 = 1e-9;

/// An `n x d` matrix whose rows are unit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Array2<f64>);

impl Embedding {
    /// Wraps `x`, checking that every row has unit norm.
    pub fn new(x: Array2<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::Dimension("embedding must be non-empty".into()));
        }
        for (i, row) in x.rows().into_iter().enumerate() {
            let norm = row.dot(&row).sqrt();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "embedding row {i} has norm {norm}, expected 1"
                )));
            }
        }
        Ok(Self(x))
    }

    /// Scales every row of `x` to unit norm. Zero rows are rejected.
    pub fn normalized(mut x: Array2<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::Dimension("embedding must be non-empty".into()));
        }
        if !normalize_rows(&mut x) {
            return Err(Error::Numeric("cannot normalize a zero row".into()));
        }
        Ok(Self(x))
    }

    /// Rows drawn uniformly on the unit sphere.
    pub fn random(n: usize, d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let x = Array2::from_shape_simple_fn((n, d), || StandardNormal.sample(&mut rng));
            if let Ok(e) = Self::normalized(x) {
                return e;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    /// Row `i` of the result is row `perm[i]` of `self`.
    pub fn select_rows(&self, perm: &[usize]) -> Self {
        Self(self.0.select(Axis(0), perm))
    }
}

/// Scales rows to unit norm in place; returns `false` if a zero row was found.
fn normalize_rows(x: &mut Array2<f64>) -> bool {
    let mut ok = true;
    for mut row in x.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 && norm.is_finite() {
            row /= norm;
        } else {
            ok = false;
        }
    }
    ok
}

/// Strategy used for the partition functions `Z_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZMode {
    /// Exact when `n <= 2000`, mixture otherwise.
    #[default]
    Auto,
    Exact,
    Mixture,
}

impl std::str::FromStr for ZMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "exact" => Ok(Self::Exact),
            "mixture" => Ok(Self::Mixture),
            _ => Err(Error::InvalidArgument(format!("unknown z mode `{s}`"))),
        }
    }
}

/// Resolved partition-function strategy for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionEstimate {
    Exact,
    /// Gaussian mixture with `q` groups; groups come from k-means seeded by
    /// `seed` when `q > 1`.
    Mixture { q: usize, seed: u64 },
}

/// Optimizer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EDRepConfig {
    pub d: usize,
    /// Number of mixture groups for the `Z` estimate.
    pub q: usize,
    pub epochs: usize,
    pub step_size: f64,
    /// Multiply the step by `(1 + cos(pi e / epochs)) / 2` at epoch `e`.
    pub cosine_decay: bool,
    pub seed: u64,
    pub z_mode: ZMode,
    /// Stop when the relative loss decrease falls below this value.
    pub tol: f64,
    pub operator: OperatorMode,
    pub dense_cap: usize,
    /// Step halvings tried before giving up on an epoch.
    pub max_backtracks: usize,
}

impl Default for EDRepConfig {
    fn default() -> Self {
        Self {
            d: 32,
            q: 1,
            epochs: 30,
            step_size: 0.5,
            cosine_decay: true,
            seed: 0,
            z_mode: ZMode::Auto,
            tol: 1e-5,
            operator: OperatorMode::Auto,
            dense_cap: DEFAULT_DENSE_CAP,
            max_backtracks: 30,
        }
    }
}

impl EDRepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.q == 0 || self.epochs == 0 {
            return Err(Error::InvalidArgument(
                "d, q and epochs must all be at least 1".into(),
            ));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::InvalidArgument("step size must be positive".into()));
        }
        Ok(())
    }

    fn partition_for(&self, n: usize, epoch: usize) -> PartitionEstimate {
        let exact = match self.z_mode {
            ZMode::Exact => true,
            ZMode::Mixture => false,
            ZMode::Auto => n <= EXACT_Z_MAX_NODES,
        };
        if exact {
            PartitionEstimate::Exact
        } else {
            PartitionEstimate::Mixture {
                q: self.q,
                seed: self.seed.wrapping_add(epoch as u64),
            }
        }
    }
}

/// Per-group statistics of the embedding cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSummary {
    /// Group of every node.
    pub assignment: Vec<usize>,
    /// Group sizes `pi_a`.
    pub sizes: Vec<f64>,
    /// `q x d` group means.
    pub means: Array2<f64>,
    /// Population covariance of each group.
    pub covariances: Vec<Array2<f64>>,
}

impl MixtureSummary {
    /// Computes the statistics for a given grouping. Empty groups are dropped.
    pub fn from_assignment(x: ArrayView2<f64>, assignment: &[usize]) -> Result<Self> {
        if assignment.len() != x.nrows() {
            return Err(Error::Dimension(format!(
                "{} group labels for {} rows",
                assignment.len(),
                x.nrows()
            )));
        }
        let q_raw = assignment.iter().copied().max().map_or(0, |m| m + 1);
        let mut counts = vec![0usize; q_raw];
        for &a in assignment {
            counts[a] += 1;
        }
        let mut compact = vec![usize::MAX; q_raw];
        let mut q = 0;
        for (a, &c) in counts.iter().enumerate() {
            if c > 0 {
                compact[a] = q;
                q += 1;
            }
        }
        let assignment: Vec<usize> = assignment.iter().map(|&a| compact[a]).collect();

        let d = x.ncols();
        let mut sizes = vec![0.0; q];
        let mut means = Array2::<f64>::zeros((q, d));
        for (i, &a) in assignment.iter().enumerate() {
            sizes[a] += 1.0;
            let mut m = means.row_mut(a);
            m += &x.row(i);
        }
        for (a, mut m) in means.rows_mut().into_iter().enumerate() {
            m /= sizes[a];
        }
        let mut covariances = vec![Array2::<f64>::zeros((d, d)); q];
        for (i, &a) in assignment.iter().enumerate() {
            let dev = &x.row(i) - &means.row(a);
            let cov = &mut covariances[a];
            for r in 0..d {
                for c in 0..d {
                    cov[[r, c]] += dev[r] * dev[c];
                }
            }
        }
        for (a, cov) in covariances.iter_mut().enumerate() {
            cov.mapv_inplace(|v| v / sizes[a]);
        }
        Ok(Self {
            assignment,
            sizes,
            means,
            covariances,
        })
    }

    /// Groups the rows of `x` into `q` clusters (one group when `q = 1`, one
    /// node per group when `q = n`, k-means otherwise).
    pub fn fit(x: ArrayView2<f64>, q: usize, seed: u64) -> Result<Self> {
        let n = x.nrows();
        if q == 0 {
            return Err(Error::InvalidArgument("q must be at least 1".into()));
        }
        if q > n {
            return Err(Error::InvalidArgument(format!(
                "q = {q} exceeds the number of nodes {n}"
            )));
        }
        let assignment: Vec<usize> = if q == 1 {
            vec![0; n]
        } else if q == n {
            (0..n).collect()
        } else {
            let km = KMeans::new(KMeansConfig {
                restarts: 1,
                max_iter: 50,
            });
            km.fit(x, q, seed)?.labels
        };
        Self::from_assignment(x, &assignment)
    }

    pub fn q(&self) -> usize {
        self.sizes.len()
    }

    /// Log-exponents `log pi_a + x_i . mu_a + x_i^T Omega_a x_i / 2` for
    /// every node and group (`n x q`).
    fn log_terms(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let n = x.nrows();
        let q = self.q();
        let mut out = Array2::zeros((n, q));
        out.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut row)| {
                let xi = x.row(i);
                for a in 0..q {
                    let quad = xi.dot(&self.covariances[a].dot(&xi));
                    row[a] = self.sizes[a].ln() + xi.dot(&self.means.row(a)) + 0.5 * quad;
                }
            });
        out
    }
}

/// Estimated partition functions `Z_i` from a `q`-group mixture summary.
pub fn estimate_z(x: &Embedding, q: usize, seed: u64) -> Result<Vec<f64>> {
    let summary = MixtureSummary::fit(x.view(), q, seed)?;
    Ok(summary
        .log_terms(x.view())
        .rows()
        .into_iter()
        .map(|r| log_sum_exp(r.iter().copied()).exp())
        .collect())
}

/// Exact `Z_i = sum_k exp(x_i . x_k)`.
pub fn exact_z(x: ArrayView2<f64>) -> Vec<f64> {
    let n = x.nrows();
    let blocks: Vec<Vec<f64>> = (0..n.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|b| {
            let lo = b * ROW_BLOCK;
            let hi = (lo + ROW_BLOCK).min(n);
            let sims = x.slice(s![lo..hi, ..]).dot(&x.t());
            sims.rows()
                .into_iter()
                .map(|r| r.iter().map(|v| v.exp()).sum())
                .collect()
        })
        .collect();
    blocks.concat()
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + it.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Column sums with a fixed summation order.
fn column_sums(m: ArrayView2<f64>) -> Array1<f64> {
    let mut s = Array1::zeros(m.ncols());
    for row in m.rows() {
        s += &row;
    }
    s
}

/// Row-wise dot products `sum_i a_i . b_i` in a fixed order.
fn frobenius_dot(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    let per_row: Vec<f64> = a
        .rows()
        .into_iter()
        .zip(b.rows())
        .map(|(x, y)| x.dot(&y))
        .collect();
    per_row.iter().sum()
}

/// The embedding loss for a fixed operator.
pub struct Objective<'a> {
    op: &'a GlobalTransitionOperator,
    row_sums: Array1<f64>,
}

/// Loss value together with its Euclidean gradient.
#[derive(Debug, Clone)]
pub struct LossAndGradient {
    pub loss: f64,
    pub gradient: Array2<f64>,
}

impl<'a> Objective<'a> {
    pub fn new(op: &'a GlobalTransitionOperator) -> Self {
        Self {
            op,
            row_sums: Array1::from(op.row_sums()),
        }
    }

    fn check(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.nrows() != self.op.n() {
            return Err(Error::Dimension(format!(
                "embedding has {} rows, operator has n = {}",
                x.nrows(),
                self.op.n()
            )));
        }
        Ok(())
    }

    /// `|sum_i x_i|^2 / n`.
    pub fn regularizer(x: ArrayView2<f64>) -> f64 {
        let s = column_sums(x);
        s.dot(&s) / x.nrows() as f64
    }

    /// `(2 / n) sum_j x_j`, repeated on every row.
    pub fn regularizer_gradient(x: ArrayView2<f64>) -> Array2<f64> {
        let s = column_sums(x) * (2.0 / x.nrows() as f64);
        let mut g = Array2::zeros(x.raw_dim());
        g.rows_mut().into_iter().for_each(|mut r| r.assign(&s));
        g
    }

    /// `sum_i r_i log Z_i` under the chosen estimate.
    fn log_partition(&self, x: ArrayView2<f64>, est: PartitionEstimate) -> Result<f64> {
        let logs: Vec<f64> = match est {
            PartitionEstimate::Exact => exact_z(x).into_iter().map(f64::ln).collect(),
            PartitionEstimate::Mixture { q, seed } => {
                let summary = MixtureSummary::fit(x, q, seed)?;
                summary
                    .log_terms(x)
                    .rows()
                    .into_iter()
                    .map(|r| log_sum_exp(r.iter().copied()))
                    .collect()
            }
        };
        Ok(logs.iter().zip(self.row_sums.iter()).map(|(l, r)| r * l).sum())
    }

    pub fn loss(&self, x: ArrayView2<f64>, est: PartitionEstimate) -> Result<f64> {
        self.check(x)?;
        let px = self.op.apply(x)?;
        let linear = frobenius_dot(px.view(), x);
        Ok(self.log_partition(x, est)? - linear + Self::regularizer(x))
    }

    /// Gradient of the cross-entropy term only.
    pub fn cross_entropy_gradient(&self, x: ArrayView2<f64>, est: PartitionEstimate) -> Result<Array2<f64>> {
        self.check(x)?;
        let px = self.op.apply(x)?;
        let ptx = self.op.apply_transpose(x)?;
        let mut g = match est {
            PartitionEstimate::Exact => self.exact_log_partition_gradient(x),
            PartitionEstimate::Mixture { q, seed } => {
                let summary = MixtureSummary::fit(x, q, seed)?;
                self.mixture_log_partition_gradient(x, &summary)
            }
        };
        g -= &px;
        g -= &ptx;
        Ok(g)
    }

    pub fn gradient(&self, x: ArrayView2<f64>, est: PartitionEstimate) -> Result<Array2<f64>> {
        let mut g = self.cross_entropy_gradient(x, est)?;
        g += &Self::regularizer_gradient(x);
        Ok(g)
    }

    pub fn loss_and_gradient(&self, x: ArrayView2<f64>, est: PartitionEstimate) -> Result<LossAndGradient> {
        self.check(x)?;
        let px = self.op.apply(x)?;
        let ptx = self.op.apply_transpose(x)?;
        let (log_z, mut g) = match est {
            PartitionEstimate::Exact => {
                let z = exact_z(x);
                let log_z: f64 = z.iter().zip(self.row_sums.iter()).map(|(z, r)| r * z.ln()).sum();
                (log_z, self.exact_gradient_with_z(x, &z))
            }
            PartitionEstimate::Mixture { q, seed } => {
                let summary = MixtureSummary::fit(x, q, seed)?;
                let log_z = summary
                    .log_terms(x)
                    .rows()
                    .into_iter()
                    .zip(self.row_sums.iter())
                    .map(|(r, w)| w * log_sum_exp(r.iter().copied()))
                    .sum();
                (log_z, self.mixture_log_partition_gradient(x, &summary))
            }
        };
        let loss = log_z - frobenius_dot(px.view(), x) + Self::regularizer(x);
        g -= &px;
        g -= &ptx;
        g += &Self::regularizer_gradient(x);
        Ok(LossAndGradient { loss, gradient: g })
    }

    fn exact_log_partition_gradient(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let z = exact_z(x);
        self.exact_gradient_with_z(x, &z)
    }

    /// `sum_j exp(s_kj) (a_k + a_j) x_j` with `a = r / Z`.
    fn exact_gradient_with_z(&self, x: ArrayView2<f64>, z: &[f64]) -> Array2<f64> {
        let n = x.nrows();
        let a: Vec<f64> = z.iter().zip(self.row_sums.iter()).map(|(z, r)| r / z).collect();
        let blocks: Vec<Array2<f64>> = (0..n.div_ceil(ROW_BLOCK))
            .into_par_iter()
            .map(|b| {
                let lo = b * ROW_BLOCK;
                let hi = (lo + ROW_BLOCK).min(n);
                let mut w = x.slice(s![lo..hi, ..]).dot(&x.t());
                for (r, mut row) in w.rows_mut().into_iter().enumerate() {
                    let ak = a[lo + r];
                    Zip::from(&mut row)
                        .and(&a[..])
                        .for_each(|v, &aj| *v = v.exp() * (ak + aj));
                }
                w.dot(&x)
            })
            .collect();
        let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
        ndarray::concatenate(Axis(0), &views).expect("blocks share d")
    }

    fn mixture_log_partition_gradient(&self, x: ArrayView2<f64>, summary: &MixtureSummary) -> Array2<f64> {
        let (n, d) = x.dim();
        let q = summary.q();
        // w_ia: posterior-like weights of each group in Z_i
        let mut w = summary.log_terms(x);
        for mut row in w.rows_mut() {
            let lse = log_sum_exp(row.iter().copied());
            row.mapv_inplace(|v| (v - lse).exp());
        }

        // A_a and B_a, reduced in node order
        let mut big_a = Array2::<f64>::zeros((q, d));
        let mut big_b = vec![Array2::<f64>::zeros((d, d)); q];
        for i in 0..n {
            let xi = x.row(i);
            let ri = self.row_sums[i];
            for a in 0..q {
                let c = ri * w[[i, a]];
                if c == 0.0 {
                    continue;
                }
                big_a.row_mut(a).scaled_add(c, &xi);
                let b = &mut big_b[a];
                for r in 0..d {
                    let cr = 0.5 * c * xi[r];
                    for k in 0..d {
                        b[[r, k]] += cr * xi[k];
                    }
                }
            }
        }

        let mut g = Array2::zeros((n, d));
        g.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(k, mut gk)| {
                let xk = x.row(k);
                let rk = self.row_sums[k];
                for b in 0..q {
                    let c = rk * w[[k, b]];
                    gk.scaled_add(c, &summary.means.row(b));
                    gk.scaled_add(c, &summary.covariances[b].dot(&xk));
                }
                let a = summary.assignment[k];
                let pi = summary.sizes[a];
                gk.scaled_add(1.0 / pi, &big_a.row(a));
                let dev = &xk - &summary.means.row(a);
                gk.scaled_add(2.0 / pi, &big_b[a].dot(&dev));
            });
        g
    }
}

/// Exact loss, for graphs small enough that `O(n^2 d)` is acceptable.
pub fn loss_exact(op: &GlobalTransitionOperator, x: &Embedding) -> Result<f64> {
    Objective::new(op).loss(x.view(), PartitionEstimate::Exact)
}

/// Euclidean gradient of the loss at `x`.
pub fn gradient(op: &GlobalTransitionOperator, x: &Embedding, est: PartitionEstimate) -> Result<Array2<f64>> {
    Objective::new(op).gradient(x.view(), est)
}

/// Result of an optimization run.
#[derive(Debug, Clone)]
pub struct EmbedOutcome {
    pub embedding: Embedding,
    /// Loss at the start and after every accepted step.
    pub losses: Vec<f64>,
    pub epochs_run: usize,
    pub converged: bool,
}

/// Embeds `g` with the given settings.
pub fn embed(g: &TemporalGraph, cfg: &EDRepConfig) -> Result<Embedding> {
    Ok(embed_with_trace(g, cfg)?.embedding)
}

pub fn embed_with_trace(g: &TemporalGraph, cfg: &EDRepConfig) -> Result<EmbedOutcome> {
    cfg.validate()?;
    let op = GlobalTransitionOperator::build_with_cap(g, cfg.operator, cfg.dense_cap)?;
    embed_operator(&op, cfg)
}

/// Projected gradient descent on the product of unit spheres.
///
/// Each step removes the radial component of every row of the gradient,
/// moves against it and renormalizes the rows. A step that increases the loss
/// is retried with half the step size.
pub fn embed_operator(op: &GlobalTransitionOperator, cfg: &EDRepConfig) -> Result<EmbedOutcome> {
    cfg.validate()?;
    let n = op.n();
    let objective = Objective::new(op);
    let mut x = Embedding::random(n, cfg.d, cfg.seed).into_inner();

    let mut est = cfg.partition_for(n, 0);
    let mut current = objective.loss_and_gradient(x.view(), est)?;
    let mut losses = vec![current.loss];
    let mut converged = false;
    let mut epochs_run = 0;

    for epoch in 0..cfg.epochs {
        epochs_run = epoch + 1;
        let next_est = cfg.partition_for(n, epoch);
        if next_est != est {
            est = next_est;
            current = objective.loss_and_gradient(x.view(), est)?;
        }
        if !current.loss.is_finite() {
            return Err(Error::Numeric(format!("loss became {}", current.loss)));
        }

        let mut riemannian = current.gradient.clone();
        Zip::from(riemannian.rows_mut())
            .and(x.rows())
            .for_each(|mut g, xi| {
                let radial = g.dot(&xi);
                g.scaled_add(-radial, &xi);
            });

        let decay = if cfg.cosine_decay {
            0.5 * (1.0 + (std::f64::consts::PI * epoch as f64 / cfg.epochs as f64).cos())
        } else {
            1.0
        };
        let mut eta = cfg.step_size * decay;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let mut trial = &x - &(&riemannian * eta);
            if !normalize_rows(&mut trial) {
                eta *= 0.5;
                continue;
            }
            let trial_loss = objective.loss(trial.view(), est)?;
            if trial_loss <= current.loss {
                accepted = Some((trial, trial_loss));
                break;
            }
            eta *= 0.5;
        }
        let Some((trial, trial_loss)) = accepted else {
            converged = true;
            break;
        };
        let rel = (current.loss - trial_loss) / current.loss.abs().max(f64::MIN_POSITIVE);
        x = trial;
        current = objective.loss_and_gradient(x.view(), est)?;
        losses.push(current.loss);
        if rel < cfg.tol {
            converged = true;
            break;
        }
    }

    Ok(EmbedOutcome {
        embedding: Embedding::new(x)?,
        losses,
        epochs_run,
        converged,
    })
}
