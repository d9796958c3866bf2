//! Distances between embedded temporal graphs.
//!
//! * The matched distance compares the node-similarity matrices `X X^T` of two
//!   embeddings over the same (aligned) node set. It is computed from `d x d`
//!   cross products only:
//!   `|X1^T X1|_F^2 + |X2^T X2|_F^2 - 2 |X1^T X2|_F^2 = |X1 X1^T - X2 X2^T|_F^2`.
//! * The unmatched distance compares the sorted spectra of the normalized
//!   second-moment matrices `X^T X / n`. It ignores node identities, so the
//!   graphs may differ in size.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edrep::Embedding;
use crate::error::{Error, Result};

/// Below this fraction of `|X1^T X1|^2 + |X2^T X2|^2` the Gram-based radicand
/// is dominated by round-off.
const CANCELLATION: f64 = 1e-6;

/// Kind of graph distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Matched,
    Unmatched,
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matched" | "m" => Ok(Self::Matched),
            "unmatched" | "u" => Ok(Self::Unmatched),
            _ => Err(Error::InvalidArgument(format!("unknown distance kind `{s}`"))),
        }
    }
}

impl std::fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Matched => "matched",
            Self::Unmatched => "unmatched",
        })
    }
}

/// Eigenvalues of `X^T X / n` in non-increasing order, clamped at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaVector(Vec<f64>);

impl LambdaVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn distance(&self, other: &LambdaVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "eigenvalue vectors of length {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

fn gram(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    a.t().dot(&b)
}

fn frobenius_sq(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

/// Spectrum of `X^T X / n`.
pub fn lambda_vector(x: &Embedding) -> LambdaVector {
    let d = x.dim();
    let n = x.n() as f64;
    // canonical row order, so that permuting nodes gives bit-identical sums
    let mut order: Vec<usize> = (0..x.n()).collect();
    let rows = x.as_array();
    order.sort_by(|&a, &b| {
        rows.row(a)
            .iter()
            .zip(rows.row(b).iter())
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sorted = rows.select(Axis(0), &order);
    let m = gram(sorted.view(), sorted.view()) / n;
    // symmetrize exactly before handing to the solver
    let sym = DMatrix::from_fn(d, d, |r, c| 0.5 * (m[[r, c]] + m[[c, r]]));
    let mut vals: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .map(|&v| v.max(0.0))
        .collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    LambdaVector(vals)
}

/// Matched distance `|X1 X1^T - X2 X2^T|_F` between embeddings whose rows
/// refer to the same nodes in the same order.
///
/// The caller is responsible for the row alignment; a silently permuted
/// input cannot be detected.
pub fn matched_distance(x1: &Embedding, x2: &Embedding) -> Result<f64> {
    if x1.n() != x2.n() {
        return Err(Error::Dimension(format!(
            "matched distance needs equal node counts, got {} and {}",
            x1.n(),
            x2.n()
        )));
    }
    if x1.dim() != x2.dim() {
        return Err(Error::Dimension(format!(
            "embedding dimensions differ: {} and {}",
            x1.dim(),
            x2.dim()
        )));
    }
    if x1.as_array() == x2.as_array() {
        return Ok(0.0);
    }
    // fixed argument order makes the result exactly symmetric
    let ordered = x1
        .as_array()
        .iter()
        .zip(x2.as_array().iter())
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal);
    let (x1, x2) = if ordered.is_gt() { (x2, x1) } else { (x1, x2) };
    let g11 = frobenius_sq(&gram(x1.view(), x1.view()));
    let g22 = frobenius_sq(&gram(x2.view(), x2.view()));
    let g12 = frobenius_sq(&gram(x1.view(), x2.view()));
    let radicand = g11 + g22 - 2.0 * g12;
    if radicand >= CANCELLATION * (g11 + g22) {
        return Ok(radicand.sqrt());
    }
    // the three terms are O(n^2) and nearly cancel; use the QR form instead
    let d = qr_matched_distance(x1, x2);
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Numeric(format!("matched distance evaluated to {d}")))
    }
}

/// With `[X1 X2] = Q [R1 R2]`, `X1 X1^T - X2 X2^T = Q (R1 R1^T - R2 R2^T) Q^T`,
/// and the small middle factor is formed without cancellation.
fn qr_matched_distance(x1: &Embedding, x2: &Embedding) -> f64 {
    let (n, d) = (x1.n(), x1.dim());
    let (a1, a2) = (x1.as_array(), x2.as_array());
    let stacked = DMatrix::from_fn(n, 2 * d, |i, c| if c < d { a1[[i, c]] } else { a2[[i, c - d]] });
    let r = stacked.qr().r();
    let r1 = r.columns(0, d);
    let r2 = r.columns(d, d);
    (r1 * r1.transpose() - r2 * r2.transpose()).norm()
}

/// Unmatched distance: Euclidean norm between the spectra of `X1^T X1 / n1`
/// and `X2^T X2 / n2`.
pub fn unmatched_distance(x1: &Embedding, x2: &Embedding) -> Result<f64> {
    if x1.dim() != x2.dim() {
        return Err(Error::Dimension(format!(
            "embedding dimensions differ: {} and {}",
            x1.dim(),
            x2.dim()
        )));
    }
    lambda_vector(x1).distance(&lambda_vector(x2))
}

/// Symmetric matrix of pairwise graph distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    kind: DistanceKind,
    ids: Vec<String>,
    values: Array2<f64>,
}

impl DistanceMatrix {
    /// Wraps a precomputed matrix after checking shape, symmetry, zero
    /// diagonal and non-negativity.
    pub fn new(kind: DistanceKind, ids: Vec<String>, values: Array2<f64>) -> Result<Self> {
        let m = ids.len();
        if values.dim() != (m, m) {
            return Err(Error::Dimension(format!(
                "{} ids for a {:?} matrix",
                m,
                values.dim()
            )));
        }
        for a in 0..m {
            if values[[a, a]] != 0.0 {
                return Err(Error::InvalidArgument("non-zero diagonal".into()));
            }
            for b in 0..m {
                let v = values[[a, b]];
                if !(v >= 0.0) || v != values[[b, a]] {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({a}, {b}) is negative or asymmetric"
                    )));
                }
            }
        }
        Ok(Self { kind, ids, values })
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[[a, b]]
    }

    /// Applies the same permutation to rows and columns: entry `(a, b)` of
    /// the result is entry `(perm[a], perm[b])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let m = self.len();
        let values = Array2::from_shape_fn((m, m), |(a, b)| self.values[[perm[a], perm[b]]]);
        let ids = perm.iter().map(|&p| self.ids[p].clone()).collect();
        Self {
            kind: self.kind,
            ids,
            values,
        }
    }
}

/// Pairwise distances between all embeddings. `ids` defaults to `0..m`.
pub fn pairwise_distances(
    embeddings: &[Embedding],
    ids: Option<Vec<String>>,
    kind: DistanceKind,
) -> Result<DistanceMatrix> {
    let m = embeddings.len();
    let ids = ids.unwrap_or_else(|| (0..m).map(|k| k.to_string()).collect());
    if ids.len() != m {
        return Err(Error::Dimension(format!("{} ids for {m} embeddings", ids.len())));
    }
    if let Some(first) = embeddings.first() {
        for e in embeddings {
            if e.dim() != first.dim() {
                return Err(Error::Dimension("embeddings have different dimensions".into()));
            }
            if kind == DistanceKind::Matched && e.n() != first.n() {
                return Err(Error::Dimension(
                    "matched distances need equal node counts".into(),
                ));
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| ((a + 1)..m).map(move |b| (a, b)))
        .collect();
    let dists: Vec<f64> = match kind {
        DistanceKind::Unmatched => {
            let lambdas: Vec<LambdaVector> = embeddings.par_iter().map(lambda_vector).collect();
            pairs
                .par_iter()
                .map(|&(a, b)| lambdas[a].distance(&lambdas[b]))
                .collect::<Result<_>>()?
        }
        DistanceKind::Matched => pairs
            .par_iter()
            .map(|&(a, b)| matched_distance(&embeddings[a], &embeddings[b]))
            .collect::<Result<_>>()?,
    };
    let mut values = Array2::zeros((m, m));
    for (&(a, b), &v) in pairs.iter().zip(&dists) {
        values[[a, b]] = v;
        values[[b, a]] = v;
    }
    Ok(DistanceMatrix { kind, ids, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn identical_embeddings() {
        let x = Embedding::random(20, 3, 1);
        assert_eq!(matched_distance(&x, &x).unwrap(), 0.0);
        assert_eq!(unmatched_distance(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn near_identical_embeddings_stay_accurate() {
        let x = Embedding::random(150, 6, 2);
        let mut y = x.as_array().clone();
        y[[3, 0]] += 1e-7;
        let y = Embedding::normalized(y).unwrap();
        let direct = x.as_array().dot(&x.as_array().t()) - y.as_array().dot(&y.as_array().t());
        let direct = direct.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dm = matched_distance(&x, &y).unwrap();
        assert!(direct > 0.0);
        assert!((dm - direct).abs() <= 1e-12, "{dm} vs {direct}");
    }

    #[test]
    fn lambda_of_replicated_identity() {
        let d = 4;
        let rows: Vec<f64> = (0..3 * d)
            .flat_map(|k| (0..d).map(move |c| if c == k % d { 1.0 } else { 0.0 }))
            .collect();
        let x = Embedding::new(Array2::from_shape_vec((3 * d, d), rows).unwrap()).unwrap();
        for v in lambda_vector(&x).values() {
            assert_abs_diff_eq!(*v, 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn lambda_of_rank_one() {
        let x = Embedding::new(array![[0.6, 0.8], [0.6, 0.8], [0.6, 0.8]]).unwrap();
        let l = lambda_vector(&x);
        assert_abs_diff_eq!(l.values()[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l.values()[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_one_against_isotropic() {
        let a = Embedding::new(array![[1.0, 0.0], [1.0, 0.0]]).unwrap();
        let b = Embedding::new(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_abs_diff_eq!(unmatched_distance(&a, &b).unwrap(), 0.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn unmatched_accepts_different_sizes() {
        let a = Embedding::random(10, 3, 1);
        let b = Embedding::random(25, 3, 2);
        assert!(unmatched_distance(&a, &b).unwrap() > 0.0);
        assert!(matched_distance(&a, &b).is_err());
        let c = Embedding::random(10, 4, 3);
        assert!(unmatched_distance(&a, &c).is_err());
        assert!(matched_distance(&a, &c).is_err());
    }

    #[test]
    fn pairwise_small_cases() {
        let x = Embedding::random(8, 3, 4);
        let one = pairwise_distances(std::slice::from_ref(&x), None, DistanceKind::Matched).unwrap();
        assert_eq!(one.values(), &Array2::<f64>::zeros((1, 1)));
        for kind in [DistanceKind::Matched, DistanceKind::Unmatched] {
            let three = pairwise_distances(&[x.clone(), x.clone(), x.clone()], None, kind).unwrap();
            assert!(three.values().iter().all(|&v| v == 0.0));
        }
        let y = Embedding::random(9, 3, 5);
        assert!(pairwise_distances(&[x.clone(), y.clone()], None, DistanceKind::Matched).is_err());
        assert!(pairwise_distances(&[x, y], None, DistanceKind::Unmatched).is_ok());
    }

    #[test]
    fn distance_matrix_validation() {
        let ids = vec!["a".to_string(), "b".to_string()];
        assert!(DistanceMatrix::new(DistanceKind::Matched, ids.clone(), array![[0.0, 1.0], [1.0, 0.0]]).is_ok());
        assert!(DistanceMatrix::new(DistanceKind::Matched, ids.clone(), array![[0.0, 1.0], [2.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(DistanceKind::Matched, ids, array![[1.0, 1.0], [1.0, 0.0]]).is_err());
    }
}
