//! Clustering of distance matrices and partition comparison.

pub mod experiments;
pub mod kmeans;
pub mod nmf;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::distances::DistanceMatrix;
use crate::error::{Error, Result};

pub use kmeans::kmeans;
pub use nmf::nmf;

/// NMF iterations used when clustering a distance matrix.
pub const CLUSTER_NMF_ITERS: usize = 500;

/// A class label per item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling(Vec<usize>);

impl Labeling {
    pub fn new(labels: Vec<usize>) -> Self {
        Self(labels)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// One more than the largest label.
    pub fn k(&self) -> usize {
        self.0.iter().copied().max().map_or(0, |m| m + 1)
    }
}

impl From<Vec<usize>> for Labeling {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

fn entropy(counts: impl Iterator<Item = usize>, total: f64) -> f64 {
    let mut counts: Vec<usize> = counts.filter(|&c| c > 0).collect();
    counts.sort_unstable();
    counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with arithmetic-mean normalization,
/// `I(a; b) / ((H(a) + H(b)) / 2)`, in natural logarithms.
///
/// Partitions that agree up to relabeling score exactly 1, including two
/// single-cluster partitions.
pub fn nmi(a: &Labeling, b: &Labeling) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "labelings of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Empty("labelings are empty".into()));
    }
    let m = a.len() as f64;
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut ca: HashMap<usize, usize> = HashMap::new();
    let mut cb: HashMap<usize, usize> = HashMap::new();
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let ha = entropy(ca.values().copied(), m);
    let hb = entropy(cb.values().copied(), m);
    // equal up to relabeling (includes two single-cluster partitions)
    if joint.len() == ca.len() && joint.len() == cb.len() {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mut terms: Vec<f64> = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = c as f64 / m;
            let px = ca[&x] as f64 / m;
            let py = cb[&y] as f64 / m;
            pxy * (pxy / (px * py)).ln()
        })
        .collect();
    // fixed summation order so that nmi(a, b) == nmi(b, a) bit for bit
    terms.sort_by(f64::total_cmp);
    let mi: f64 = terms.iter().sum();
    Ok((2.0 * mi / (ha + hb)).clamp(0.0, 1.0))
}

/// Clusters the items of a distance matrix into `k` groups: NMF with `k`
/// components, then k-means on the rows of the left factor.
pub fn cluster_distances(d: &DistanceMatrix, k: usize, seed: u64) -> Result<Labeling> {
    let factor = nmf(d.values().view(), k, CLUSTER_NMF_ITERS, seed)?;
    kmeans(factor.w.view(), k, seed)
}
