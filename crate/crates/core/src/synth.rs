//! Synthetic static graphs and their temporal versions.
//!
//! Static graphs come from the degree-corrected stochastic block model
//! (DCSBM), with `P(A_ij = 1) = min(1, theta_i theta_j C[l_i, l_j] / n)`, or
//! from a random geometric model with `P(A_ij = 1) = min(1, s exp(-beta
//! |x_i - x_j|))` for positions in the unit disk. A static graph becomes a
//! temporal one by giving every edge the activity series of a randomly chosen
//! edge of a reference temporal graph.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{TemporalEdge, TemporalGraph};
use crate::seed::derive_seed;

/// Mean degree of the model presets.
pub const DEFAULT_MEAN_DEGREE: f64 = 4.8;
/// Decay rate of the geometric preset.
pub const GEOMETRIC_BETA: f64 = 20.0;
const SBM_CLASSES: usize = 5;
const BISECTION_STEPS: usize = 200;

/// An undirected simple graph on `n` nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticGraph {
    n: usize,
    /// Sorted pairs `(i, j)` with `i < j`.
    edges: Vec<(usize, usize)>,
}

impl StaticGraph {
    /// Builds a graph from unordered pairs; duplicates are merged.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = Vec::new();
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop on node {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            out.push((i.min(j), i.max(j)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self { n, edges: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Mean local clustering coefficient; nodes of degree below two count
    /// as zero.
    pub fn average_clustering(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let adj = self.neighbors();
        let total: f64 = adj
            .iter()
            .map(|nb| {
                let k = nb.len();
                if k < 2 {
                    return 0.0;
                }
                let mut links = 0usize;
                for (a, &u) in nb.iter().enumerate() {
                    for &v in &nb[a + 1..] {
                        if adj[u].binary_search(&v).is_ok() {
                            links += 1;
                        }
                    }
                }
                2.0 * links as f64 / (k * (k - 1)) as f64
            })
            .sum();
        total / self.n as f64
    }
}

/// Parameters of a degree-corrected stochastic block model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DCSBMParams {
    /// Class of each node, `0..k`.
    pub labels: Vec<usize>,
    /// `k x k` symmetric non-negative affinity matrix.
    pub affinity: Array2<f64>,
    /// Degree propensities summing to `n`.
    pub theta: Vec<f64>,
}

impl DCSBMParams {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.affinity.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let k = self.k();
        if self.affinity.ncols() != k {
            return Err(Error::Dimension("affinity matrix must be square".into()));
        }
        if self.theta.len() != n {
            return Err(Error::Dimension(format!(
                "{} propensities for {n} nodes",
                self.theta.len()
            )));
        }
        if let Some(l) = self.labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidArgument(format!("label {l} with only {k} classes")));
        }
        for a in 0..k {
            for b in 0..k {
                let c = self.affinity[[a, b]];
                if !(c >= 0.0) || !c.is_finite() || c != self.affinity[[b, a]] {
                    return Err(Error::InvalidArgument(
                        "affinity must be symmetric, finite and non-negative".into(),
                    ));
                }
            }
        }
        if self.theta.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidArgument("propensities must be non-negative".into()));
        }
        let sum: f64 = self.theta.iter().sum();
        if (sum - n as f64).abs() > 1e-6 * n as f64 {
            return Err(Error::InvalidArgument(format!(
                "propensities sum to {sum}, expected {n}"
            )));
        }
        Ok(())
    }

    fn probability(&self, i: usize, j: usize, scale: f64) -> f64 {
        let c = self.affinity[[self.labels[i], self.labels[j]]];
        (scale * self.theta[i] * self.theta[j] * c / self.n() as f64).min(1.0)
    }

    /// Expected mean degree with the affinity multiplied by `scale`.
    pub fn expected_mean_degree(&self, scale: f64) -> f64 {
        let n = self.n();
        if n == 0 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                total += self.probability(i, j, scale);
            }
        }
        2.0 * total / n as f64
    }

    /// Rescales the affinity so that the expected mean degree equals
    /// `target`.
    pub fn calibrate(mut self, target: f64) -> Result<Self> {
        self.validate()?;
        let scale = bisect_scale(|s| self.expected_mean_degree(s), target)?;
        self.affinity *= scale;
        Ok(self)
    }
}

/// Smallest `s` with `f(s) = target` for non-decreasing `f`, `f(0) = 0`.
fn bisect_scale(f: impl Fn(f64) -> f64, target: f64) -> Result<f64> {
    if !(target >= 0.0) {
        return Err(Error::InvalidArgument(format!("target degree {target}")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while f(hi) < target {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::InvalidArgument(format!(
                "mean degree {target} is not reachable"
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples a DCSBM graph.
pub fn dcsbm(params: &DCSBMParams, seed: u64) -> Result<StaticGraph> {
    params.validate()?;
    let n = params.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = params.probability(i, j, 1.0);
            if p > 0.0 && rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    StaticGraph::new(n, edges)
}

/// Parameters of the random geometric model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricParams {
    pub beta: f64,
    /// Multiplier on the kernel; probabilities are capped at 1.
    pub scale: f64,
    pub positions: Vec<[f64; 2]>,
}

impl GeometricParams {
    /// `n` positions drawn uniformly from the unit disk.
    pub fn uniform_disk(n: usize, beta: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions = (0..n)
            .map(|_| {
                let r = rng.random::<f64>().sqrt();
                let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                [r * phi.cos(), r * phi.sin()]
            })
            .collect();
        Self {
            beta,
            scale: 1.0,
            positions,
        }
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !(self.scale >= 0.0) {
            return Err(Error::InvalidArgument("beta must be positive and scale non-negative".into()));
        }
        if let Some(p) = self.positions.iter().find(|p| p[0].hypot(p[1]) > 1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("position {p:?} outside the unit disk")));
        }
        Ok(())
    }

    fn kernel(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.positions[i], self.positions[j]);
        (-self.beta * (a[0] - b[0]).hypot(a[1] - b[1])).exp()
    }

    pub fn expected_mean_degree(&self) -> f64 {
        let n = self.n();
        if n == 0 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                total += (self.scale * self.kernel(i, j)).min(1.0);
            }
        }
        2.0 * total / n as f64
    }

    /// Sets `scale` so that the expected mean degree equals `target`.
    pub fn calibrate(mut self, target: f64) -> Result<Self> {
        self.validate()?;
        let n = self.n();
        let kernels: Vec<f64> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.kernel(i, j))
            .collect();
        let degree = |s: f64| 2.0 * kernels.iter().map(|k| (s * k).min(1.0)).sum::<f64>() / n.max(1) as f64;
        let max = degree(f64::INFINITY);
        if target >= max {
            return Err(Error::InvalidArgument(format!(
                "mean degree {target} unreachable; at most {max:.3} with all kernels capped at 1"
            )));
        }
        self.scale = bisect_scale(degree, target)?;
        Ok(self)
    }
}

/// Samples a random geometric graph.
pub fn geometric(params: &GeometricParams, seed: u64) -> Result<StaticGraph> {
    params.validate()?;
    let n = params.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = (params.scale * params.kernel(i, j)).min(1.0);
            if p > 0.0 && rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    StaticGraph::new(n, edges)
}

/// The four model presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Erdos-Renyi.
    Er,
    /// Five equal communities.
    Sbm,
    /// Heavy-tailed degrees.
    Cm,
    /// Random geometric.
    Gm,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Er, Model::Sbm, Model::Cm, Model::Gm];

    pub fn name(self) -> &'static str {
        match self {
            Model::Er => "er",
            Model::Sbm => "sbm",
            Model::Cm => "cm",
            Model::Gm => "gm",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model `{s}`")))
    }
}

/// DCSBM parameters of the ER, SBM and CM presets before calibration.
pub fn preset_params(model: Model, n: usize, seed: u64) -> Result<DCSBMParams> {
    let (labels, affinity, theta) = match model {
        Model::Er => (vec![0; n], Array2::ones((1, 1)), vec![1.0; n]),
        Model::Sbm => {
            let k = SBM_CLASSES;
            let labels = (0..n).map(|i| i * k / n.max(1)).collect();
            let c = Array2::from_shape_fn((k, k), |(a, b)| if a == b { 20.0 } else { 1.0 });
            (labels, c, vec![1.0; n])
        }
        Model::Cm => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(3.0..10.0f64).powi(4)).collect();
            let sum: f64 = raw.iter().sum();
            let theta = raw.iter().map(|t| t * n as f64 / sum).collect();
            (vec![0; n], Array2::ones((1, 1)), theta)
        }
        Model::Gm => {
            return Err(Error::InvalidArgument("the geometric preset is not a DCSBM".into()));
        }
    };
    Ok(DCSBMParams {
        labels,
        affinity,
        theta,
    })
}

/// One graph from a model preset with the given expected mean degree.
pub fn preset(model: Model, n: usize, target_mean_degree: f64, seed: u64) -> Result<StaticGraph> {
    if n < 10 {
        return Err(Error::InvalidArgument(format!("presets need n >= 10, got {n}")));
    }
    let param_seed = derive_seed(seed, 0);
    let sample_seed = derive_seed(seed, 1);
    match model {
        Model::Gm => {
            let params = GeometricParams::uniform_disk(n, GEOMETRIC_BETA, param_seed).calibrate(target_mean_degree)?;
            geometric(&params, sample_seed)
        }
        _ => {
            let params = preset_params(model, n, param_seed)?.calibrate(target_mean_degree)?;
            dcsbm(&params, sample_seed)
        }
    }
}

/// Options for [`temporalize_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalizeOptions {
    /// Rotate each copied series by a uniform random offset (mod `T`).
    pub circular_shift: bool,
}

/// Gives every edge of `sg` the activity series (times and weights) of an
/// edge of `source` chosen uniformly at random. The output has the same
/// number of snapshots and time resolution as `source`.
pub fn temporalize(sg: &StaticGraph, source: &TemporalGraph, seed: u64) -> Result<TemporalGraph> {
    temporalize_with(sg, source, seed, TemporalizeOptions::default())
}

pub fn temporalize_with(
    sg: &StaticGraph,
    source: &TemporalGraph,
    seed: u64,
    options: TemporalizeOptions,
) -> Result<TemporalGraph> {
    let bank: Vec<Vec<(usize, f64)>> = source.edge_activity().into_values().collect();
    if bank.is_empty() {
        return Err(Error::Empty("activity source has no edges".into()));
    }
    let t_count = source.num_snapshots();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for &(i, j) in sg.edges() {
        let series = &bank[rng.random_range(0..bank.len())];
        let shift = if options.circular_shift {
            rng.random_range(0..t_count)
        } else {
            0
        };
        edges.extend(
            series
                .iter()
                .map(|&(t, w)| TemporalEdge::new((t + shift) % t_count, i, j, w)),
        );
    }
    Ok(TemporalGraph::from_edges(sg.n(), t_count, edges)?.with_t_res(source.t_res()))
}

/// Shape of the on/off durations of a synthetic activity bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BurstinessProfile {
    /// Exponent of the discrete power law `P(k) ~ k^-exponent`, `k >= 1`.
    pub exponent: f64,
    /// Number of series in the bank.
    pub series: usize,
}

impl Default for BurstinessProfile {
    fn default() -> Self {
        Self {
            exponent: 2.5,
            series: 500,
        }
    }
}

/// A bank of on/off activity series of length `t_count`.
///
/// Series `s` lives on the node pair `(2s, 2s + 1)`. Each series starts in a
/// random state and alternates between on and off periods whose lengths are
/// drawn from a discrete power law truncated at `t_count`. Every series has at
/// least one active snapshot.
pub fn synthetic_activity(t_count: usize, profile: &BurstinessProfile, seed: u64) -> Result<TemporalGraph> {
    if t_count == 0 || profile.series == 0 {
        return Err(Error::InvalidArgument("need at least one snapshot and one series".into()));
    }
    if !(profile.exponent > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "power-law exponent must exceed 1, got {}",
            profile.exponent
        )));
    }
    let zipf = Zipf::new(t_count as f64, profile.exponent)
        .map_err(|e| Error::InvalidArgument(format!("duration distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for s in 0..profile.series {
        let mut on = rng.random_bool(0.5);
        let mut t = 0;
        let mut active = Vec::new();
        while t < t_count {
            let len = zipf.sample(&mut rng) as usize;
            if on {
                active.extend(t..(t + len).min(t_count));
            }
            t += len;
            on = !on;
        }
        if active.is_empty() {
            active.push(rng.random_range(0..t_count));
        }
        edges.extend(active.into_iter().map(|t| TemporalEdge::new(t, 2 * s, 2 * s + 1, 1.0)));
    }
    TemporalGraph::from_edges(2 * profile.series, t_count, edges)
}
