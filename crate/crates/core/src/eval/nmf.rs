//! Non-negative matrix factorization by multiplicative updates.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NmfResult {
    /// `m x k` left factor.
    pub w: Array2<f64>,
    /// `k x p` right factor.
    pub h: Array2<f64>,
    /// `|M - W H|_F^2` at initialization and after each iteration.
    pub objective: Vec<f64>,
}

impl NmfResult {
    pub fn reconstruction_error(&self) -> f64 {
        self.objective.last().copied().unwrap_or(f64::NAN).max(0.0).sqrt()
    }
}

fn objective(m: ArrayView2<f64>, w: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let r = &m - &w.dot(h);
    r.iter().map(|v| v * v).sum()
}

/// Factorizes a non-negative `m x p` matrix as `W H` with inner dimension
/// `k`, minimizing the squared Frobenius error with Lee-Seung updates.
pub fn nmf(m: ArrayView2<f64>, k: usize, iters: usize, seed: u64) -> Result<NmfResult> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if let Some(v) = m.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "NMF input has a negative or NaN entry ({v})"
        )));
    }
    let (rows, cols) = m.dim();
    let mean = if m.is_empty() { 0.0 } else { m.sum() / m.len() as f64 };
    let scale = (mean / k as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Array2::from_shape_simple_fn((rows, k), || scale * rng.random::<f64>());
    let mut h = Array2::from_shape_simple_fn((k, cols), || scale * rng.random::<f64>());

    let mut history = vec![objective(m, &w, &h)];
    for _ in 0..iters {
        let num = w.t().dot(&m);
        let den = w.t().dot(&w).dot(&h);
        ndarray::Zip::from(&mut h)
            .and(&num)
            .and(&den)
            .for_each(|h, &n, &d| *h *= n / (d + EPS));

        let num = m.dot(&h.t());
        let den = w.dot(&h.dot(&h.t()));
        ndarray::Zip::from(&mut w)
            .and(&num)
            .and(&den)
            .for_each(|w, &n, &d| *w *= n / (d + EPS));

        history.push(objective(m, &w, &h));
    }
    Ok(NmfResult {
        w,
        h,
        objective: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    #[test]
    fn rank_one_recovery() {
        let v = Array1::from(vec![1.0, 2.0, 0.5, 3.0, 0.0, 1.5]);
        let m = Array2::from_shape_fn((6, 6), |(i, j)| v[i] * v[j]);
        let res = nmf(m.view(), 1, 500, 7).unwrap();
        assert!(res.reconstruction_error() < 1e-6, "{}", res.reconstruction_error());
    }

    #[test]
    fn overcomplete_fits_exactly() {
        let m = Array2::from_shape_fn((5, 5), |(i, j)| ((i * 7 + j * 3) % 5) as f64 + 0.5);
        let res = nmf(m.view(), 5, 5000, 1).unwrap();
        assert!(res.reconstruction_error() < 1e-8, "{}", res.reconstruction_error());
    }

    #[test]
    fn objective_never_increases() {
        let m = Array2::from_shape_fn((12, 12), |(i, j)| ((i as f64 - j as f64).abs()).sqrt());
        let res = nmf(m.view(), 3, 300, 2).unwrap();
        for pair in res.objective.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12) + 1e-15, "{} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn rejects_negative_input() {
        let m = ndarray::array![[0.0, -1.0], [1.0, 0.0]];
        assert!(nmf(m.view(), 1, 10, 0).is_err());
    }

    #[test]
    fn zero_matrix_stays_zero() {
        let m = Array2::<f64>::zeros((4, 4));
        let res = nmf(m.view(), 2, 10, 0).unwrap();
        assert!(res.w.iter().all(|v| *v == 0.0));
    }
}
