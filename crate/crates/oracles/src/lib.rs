//! Reference computations for tests.
//!
//! Nothing here shares code with `stereoboot-core`: hulls come from
//! exhaustive subset search, isotonic fits from pool-adjacent-violators, and
//! integrals of the naive estimators from tanh-sinh quadrature of their
//! defining integrands, split at the data points.

pub mod hull;
pub mod naive;
pub mod pava;
pub mod quad;

/// Kolmogorov distance between the empirical law of `sorted` and `cdf`.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let c = cdf(x);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    d
}
