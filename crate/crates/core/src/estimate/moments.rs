//! Plug-in moment estimators for interval sequences.
//!
//! The lag-`l` autocovariance of `N` intervals is
//! `(1 / (N - (l + 1))) * sum_{i=1}^{N-(l+1)} xi_i xi_{i+l} - mu^2`
//! with `mu` the mean of all `N` intervals; the variance is the `l = 0` case.
//! The asymptotically equivalent `N - l` normalisation is not used.

use serde::{Deserialize, Serialize};

use crate::train::IsiSequence;

pub fn mean(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// Lag-`lag` autocovariance of `xs` around a given mean. `None` below `lag + 2` values.
pub(crate) fn autocov_with_mean(xs: &[f64], lag: usize, mu: f64) -> Option<f64> {
    let n = xs.len();
    if n < lag + 2 {
        return None;
    }
    let pairs = n - (lag + 1);
    let mut acc = 0.0;
    for i in 0..pairs {
        acc += xs[i] * xs[i + lag];
    }
    Some(acc / pairs as f64 - mu * mu)
}

/// `rho_hat_lag`; `None` is the undefined marker (fewer than `lag + 2` intervals).
pub fn autocov(isis: &IsiSequence, lag: usize) -> Option<f64> {
    let xs = isis.values();
    autocov_with_mean(xs, lag, mean(xs)?)
}

/// Moment estimates of one interval sequence for dependence order `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimates {
    pub mu_hat: f64,
    pub sigma2_hat: f64,
    /// `rho_hat_1, ..., rho_hat_m`.
    pub rho_hat: Vec<f64>,
    /// May be negative; never clamped.
    pub rho2_hat: f64,
    pub n_isis: usize,
}

impl MomentEstimates {
    /// `None` when fewer than `m + 2` intervals are available.
    pub fn from_values(xs: &[f64], m: usize) -> Option<Self> {
        let mu = mean(xs)?;
        let sigma2 = autocov_with_mean(xs, 0, mu)?;
        let rho_hat = (1..=m)
            .map(|lag| autocov_with_mean(xs, lag, mu))
            .collect::<Option<Vec<_>>>()?;
        let rho2_hat = sigma2 + 2.0 * rho_hat.iter().sum::<f64>();
        Some(MomentEstimates {
            mu_hat: mu,
            sigma2_hat: sigma2,
            rho_hat,
            rho2_hat,
            n_isis: xs.len(),
        })
    }

    pub fn compute(isis: &IsiSequence, m: usize) -> Option<Self> {
        Self::from_values(isis.values(), m)
    }

    pub fn rho2_negative(&self) -> bool {
        self.rho2_hat < 0.0
    }

    /// `rho2_hat / mu_hat^3`; `None` when `rho2_hat` is negative.
    pub fn scale_component(&self) -> Option<f64> {
        scale_component(self.mu_hat, self.rho2_hat)
    }
}

/// Relative size below which `rho2_hat / mu_hat^2` is treated as an exact zero.
/// Constant interval sequences otherwise come out as `+-1e-17` and would be
/// declared undefined instead of degenerate.
pub(crate) const ZERO_RHO2_RELATIVE: f64 = 1e-9;

pub(crate) fn scale_component(mu: f64, rho2: f64) -> Option<f64> {
    if !(mu > 0.0) {
        return None;
    }
    if rho2.abs() <= ZERO_RHO2_RELATIVE * mu * mu {
        Some(0.0)
    } else if rho2 > 0.0 {
        Some(rho2 / mu.powi(3))
    } else {
        None
    }
}

/// `rho_hat^2 = sigma_hat^2 + 2 sum_{l<=m} rho_hat_l`; `None` below `m + 2` intervals.
pub fn rho2_hat(isis: &IsiSequence, m: usize) -> Option<f64> {
    MomentEstimates::compute(isis, m).map(|e| e.rho2_hat)
}

/// `(rho_hat^2 - sigma_hat^2) / sigma_hat^2`, the share of the long-run
/// variance contributed by serial correlation. `None` when `sigma_hat^2 = 0`.
pub fn correlation_contribution(isis: &IsiSequence, m: usize) -> Option<f64> {
    let e = MomentEstimates::compute(isis, m)?;
    if e.sigma2_hat.abs() <= ZERO_RHO2_RELATIVE * e.mu_hat * e.mu_hat {
        return None;
    }
    Some(2.0 * e.rho_hat.iter().sum::<f64>() / e.sigma2_hat)
}

/// Prefix sums that give the window moments of any contiguous interval range
/// in `O(m)`.
#[derive(Debug, Clone)]
pub(crate) struct PrefixMoments {
    sum: Vec<f64>,
    /// `lagged[l][k] = sum_{i<k} x_i x_{i+l}`.
    lagged: Vec<Vec<f64>>,
}

impl PrefixMoments {
    pub(crate) fn new(xs: &[f64], max_lag: usize) -> Self {
        let mut sum = Vec::with_capacity(xs.len() + 1);
        let mut acc = 0.0;
        sum.push(0.0);
        for &x in xs {
            acc += x;
            sum.push(acc);
        }
        let lagged = (0..=max_lag)
            .map(|lag| {
                let n = xs.len().saturating_sub(lag);
                let mut p = Vec::with_capacity(n + 1);
                let mut acc = 0.0;
                p.push(0.0);
                for i in 0..n {
                    acc += xs[i] * xs[i + lag];
                    p.push(acc);
                }
                p
            })
            .collect();
        PrefixMoments { sum, lagged }
    }

    /// `(mu_hat, rho2_hat)` of `xs[start..end]` for order `m`.
    pub(crate) fn mean_and_rho2(&self, start: usize, end: usize, m: usize) -> Option<(f64, f64)> {
        let n = end.checked_sub(start)?;
        if n < m + 2 || m >= self.lagged.len() {
            return None;
        }
        let mu = (self.sum[end] - self.sum[start]) / n as f64;
        let mut rho2 = 0.0;
        for lag in 0..=m {
            let pairs = n - (lag + 1);
            let p = &self.lagged[lag];
            let cov = (p[start + pairs] - p[start]) / pairs as f64 - mu * mu;
            rho2 += if lag == 0 { cov } else { 2.0 * cov };
        }
        Some((mu, rho2))
    }
}
