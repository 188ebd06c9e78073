//! Maximum mean discrepancy with an RBF kernel and the unbiased U-statistic
//! estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// Median of the pooled pairwise Euclidean distances.
    MedianHeuristic,
    Fixed(f64),
}

/// RBF kernel, unbiased estimator. No other kernels or estimators are
/// supported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmdConfig {
    pub bandwidth: Bandwidth,
}

impl Default for MmdConfig {
    fn default() -> Self {
        MmdConfig {
            bandwidth: Bandwidth::MedianHeuristic,
        }
    }
}

#[inline]
fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&a, &b)| (a - b) * (a - b)).sum()
}

#[inline]
fn rbf(sq: f64, sigma: f64) -> f64 {
    (-sq / (2.0 * sigma * sigma)).exp()
}

fn check_sets(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<()> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::rejected("mmd needs at least 2 samples per set"));
    }
    let dim = x[0].len();
    for row in x.iter().chain(y) {
        if row.len() != dim {
            return Err(Error::dim("mmd sample", dim, row.len()));
        }
    }
    Ok(())
}

/// Resolves the kernel bandwidth. The median heuristic pools both sets,
/// sorts all pairwise distances, and takes the upper median; a degenerate
/// all-zero pooled set falls back to bandwidth 1.
pub fn resolve_bandwidth(x: &[Vec<f64>], y: &[Vec<f64>], bandwidth: Bandwidth) -> Result<f64> {
    match bandwidth {
        Bandwidth::Fixed(sigma) => {
            if sigma <= 0.0 || !sigma.is_finite() {
                return Err(Error::rejected(format!("bandwidth must be > 0, got {sigma}")));
            }
            Ok(sigma)
        }
        Bandwidth::MedianHeuristic => {
            check_sets(x, y)?;
            let pooled: Vec<&Vec<f64>> = x.iter().chain(y).collect();
            let mut dists = Vec::with_capacity(pooled.len() * (pooled.len() - 1) / 2);
            for i in 0..pooled.len() {
                for j in (i + 1)..pooled.len() {
                    dists.push(sq_dist(pooled[i], pooled[j]).sqrt());
                }
            }
            dists.sort_by(f64::total_cmp);
            let median = dists[dists.len() / 2];
            Ok(if median > 0.0 { median } else { 1.0 })
        }
    }
}

/// Unbiased MMD^2 U-statistic; can be negative. The cross-kernel terms are
/// accumulated in sorted order so `mmd2(x, y)` and `mmd2(y, x)` are bitwise
/// identical.
pub fn mmd_squared_unbiased(x: &[Vec<f64>], y: &[Vec<f64>], sigma: f64) -> Result<f64> {
    check_sets(x, y)?;
    let m = x.len();
    let n = y.len();

    let mut kxx = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            kxx += rbf(sq_dist(&x[i], &x[j]), sigma);
        }
    }
    kxx = 2.0 * kxx / (m * (m - 1)) as f64;

    let mut kyy = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            kyy += rbf(sq_dist(&y[i], &y[j]), sigma);
        }
    }
    kyy = 2.0 * kyy / (n * (n - 1)) as f64;

    let mut cross: Vec<f64> = Vec::with_capacity(m * n);
    for xi in x {
        for yj in y {
            cross.push(rbf(sq_dist(xi, yj), sigma));
        }
    }
    cross.sort_by(f64::total_cmp);
    let kxy: f64 = cross.iter().sum::<f64>() / (m * n) as f64;

    Ok(kxx + kyy - 2.0 * kxy)
}

/// `sqrt(max(0, MMD^2))` with the configured bandwidth.
pub fn mmd(x: &[Vec<f64>], y: &[Vec<f64>], cfg: &MmdConfig) -> Result<f64> {
    let sigma = resolve_bandwidth(x, y, cfg.bandwidth)?;
    Ok(mmd_squared_unbiased(x, y, sigma)?.max(0.0).sqrt())
}

/// Precomputed pooled Gram matrix for permutation tests: entry `(i, j)` is
/// the kernel between pooled samples `i` and `j` (x first, then y).
pub struct PooledGram {
    k: Vec<f64>,
    n_total: usize,
}

impl PooledGram {
    pub fn new(x: &[Vec<f64>], y: &[Vec<f64>], sigma: f64) -> Result<Self> {
        check_sets(x, y)?;
        let pooled: Vec<&Vec<f64>> = x.iter().chain(y).collect();
        let n_total = pooled.len();
        let mut k = vec![0.0; n_total * n_total];
        for i in 0..n_total {
            k[i * n_total + i] = 1.0;
            for j in (i + 1)..n_total {
                let v = rbf(sq_dist(pooled[i], pooled[j]), sigma);
                k[i * n_total + j] = v;
                k[j * n_total + i] = v;
            }
        }
        Ok(PooledGram { k, n_total })
    }

    /// Unbiased MMD^2 between the pooled indices in `idx_x` and `idx_y`.
    pub fn mmd2(&self, idx_x: &[usize], idx_y: &[usize]) -> f64 {
        let m = idx_x.len();
        let n = idx_y.len();
        let at = |i: usize, j: usize| self.k[i * self.n_total + j];
        let mut kxx = 0.0;
        for a in 0..m {
            for b in (a + 1)..m {
                kxx += at(idx_x[a], idx_x[b]);
            }
        }
        kxx = 2.0 * kxx / (m * (m - 1)) as f64;
        let mut kyy = 0.0;
        for a in 0..n {
            for b in (a + 1)..n {
                kyy += at(idx_y[a], idx_y[b]);
            }
        }
        kyy = 2.0 * kyy / (n * (n - 1)) as f64;
        let mut kxy = 0.0;
        for &a in idx_x {
            for &b in idx_y {
                kxy += at(a, b);
            }
        }
        kxy /= (m * n) as f64;
        kxx + kyy - 2.0 * kxy
    }
}
