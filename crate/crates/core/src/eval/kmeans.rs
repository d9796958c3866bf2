//! Lloyd's k-means with k-means++ seeding and restarts.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Labeling;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    /// Independent k-means++ initializations; the lowest inertia wins.
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
}

#[derive(Debug, Clone, Default)]
pub struct KMeans {
    config: KMeansConfig,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KMeans {
    pub fn new(config: KMeansConfig) -> Self {
        Self { config }
    }

    pub fn fit(&self, points: ArrayView2<f64>, k: usize, seed: u64) -> Result<KMeansResult> {
        let m = points.nrows();
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if m < k {
            return Err(Error::InvalidArgument(format!(
                "cannot form {k} clusters from {m} points"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<KMeansResult> = None;
        for _ in 0..self.config.restarts.max(1) {
            let init = plus_plus(points, k, &mut rng);
            let run = self.lloyd(points, init);
            if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
                best = Some(run);
            }
        }
        Ok(best.expect("at least one restart"))
    }

    fn lloyd(&self, points: ArrayView2<f64>, mut centroids: Array2<f64>) -> KMeansResult {
        let (m, dim) = points.dim();
        let k = centroids.nrows();
        let mut labels = vec![usize::MAX; m];
        for _ in 0..self.config.max_iter {
            let mut changed = false;
            for (i, p) in points.rows().into_iter().enumerate() {
                let c = nearest(p, &centroids).0;
                if labels[i] != c {
                    labels[i] = c;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            let mut sums = Array2::<f64>::zeros((k, dim));
            let mut counts = vec![0usize; k];
            for (i, p) in points.rows().into_iter().enumerate() {
                sums.row_mut(labels[i]).scaled_add(1.0, &p);
                counts[labels[i]] += 1;
            }
            for (c, &count) in counts.iter().enumerate() {
                if count > 0 {
                    let mut row = centroids.row_mut(c);
                    row.assign(&sums.row(c));
                    row /= count as f64;
                }
            }
            // move empty clusters onto the point worst served by its centroid
            for (c, count) in counts.iter_mut().enumerate() {
                if *count == 0 {
                    let (far, dist) = points
                        .rows()
                        .into_iter()
                        .enumerate()
                        .map(|(i, p)| (i, sq_dist(p, centroids.row(labels[i]))))
                        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                    if dist > 0.0 {
                        centroids.row_mut(c).assign(&points.row(far));
                        *count = 1;
                        labels[far] = usize::MAX;
                    }
                }
            }
        }
        let mut inertia = 0.0;
        for (i, p) in points.rows().into_iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            labels[i] = c;
            inertia += d;
        }
        KMeansResult {
            labels,
            centroids,
            inertia,
        }
    }
}

/// Closest centroid, ties going to the lowest index.
fn nearest(p: ArrayView1<f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, row) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(p, row);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: ArrayView2<f64>, k: usize, rng: &mut impl Rng) -> Array2<f64> {
    let (m, dim) = points.dim();
    let mut centroids = Array2::zeros((k, dim));
    let first = rng.random_range(0..m);
    centroids.row_mut(0).assign(&points.row(first));
    let mut d2: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|p| sq_dist(p, points.row(first)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = m - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..m)
        };
        centroids.row_mut(c).assign(&points.row(pick));
        for (i, p) in points.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, points.row(pick)));
        }
    }
    centroids
}

/// k-means with default settings (10 restarts, at most 300 iterations).
pub fn kmeans(points: ArrayView2<f64>, k: usize, seed: u64) -> Result<Labeling> {
    let res = KMeans::default().fit(points, k, seed)?;
    Ok(Labeling::new(res.labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::nmi;
    use ndarray::Array2;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let mut pts = Array2::zeros((60, 2));
        let mut truth = Vec::new();
        for i in 0..60 {
            let c = i % 2;
            let center = if c == 0 { -5.0 } else { 5.0 };
            pts[[i, 0]] = center + noise.sample(&mut rng);
            pts[[i, 1]] = noise.sample(&mut rng);
            truth.push(c);
        }
        (pts, truth)
    }

    #[test]
    fn separated_blobs_split_perfectly() {
        let (pts, truth) = blobs(1);
        let labels = kmeans(pts.view(), 2, 3).unwrap();
        assert_eq!(nmi(&labels, &Labeling::new(truth)).unwrap(), 1.0);
    }

    #[test]
    fn identical_points_share_a_label() {
        let pts = Array2::from_elem((10, 3), 2.5);
        let labels = kmeans(pts.view(), 3, 0).unwrap();
        assert!(labels.as_slice().iter().all(|&l| l == labels.as_slice()[0]));
    }

    #[test]
    fn order_invariance() {
        let (pts, _) = blobs(2);
        let a = kmeans(pts.view(), 2, 5).unwrap();
        let perm: Vec<usize> = (0..60).rev().collect();
        let shuffled = pts.select(ndarray::Axis(0), &perm);
        let b = kmeans(shuffled.view(), 2, 9).unwrap();
        let b_back: Vec<usize> = {
            let mut v = vec![0; 60];
            for (pos, &orig) in perm.iter().enumerate() {
                v[orig] = b.as_slice()[pos];
            }
            v
        };
        assert_eq!(nmi(&a, &Labeling::new(b_back)).unwrap(), 1.0);
    }

    #[test]
    fn too_few_points() {
        let pts = Array2::zeros((2, 2));
        assert!(kmeans(pts.view(), 3, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let (pts, _) = blobs(3);
        let a = KMeans::default().fit(pts.view(), 3, 11).unwrap();
        let b = KMeans::default().fit(pts.view(), 3, 11).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.inertia, b.inertia);
    }
}
