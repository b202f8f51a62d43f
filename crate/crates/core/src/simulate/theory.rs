use serde::{Deserialize, Serialize};

use super::isi_sample;
use super::models::IsiModel;
use crate::error::Result;

/// Intervals drawn for the Monte Carlo moments of models without closed forms.
const MC_SAMPLE: usize = 4_000_000;
const MC_SEED: u64 = 0x5eed_b0b5;

/// Interval mean, variance, autocovariances up to the dependence order, and
/// the long-run variance `rho^2 = sigma^2 + 2 sum_l rho_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalMoments {
    pub mean: f64,
    pub variance: f64,
    /// `rho_1, ..., rho_m`.
    pub autocov: Vec<f64>,
    pub rho2: f64,
    /// False when the values are a Monte Carlo estimate.
    pub exact: bool,
}

impl TheoreticalMoments {
    fn from_parts(mean: f64, variance: f64, autocov: Vec<f64>, exact: bool) -> Self {
        let rho2 = variance + 2.0 * autocov.iter().sum::<f64>();
        TheoreticalMoments {
            mean,
            variance,
            autocov,
            rho2,
            exact,
        }
    }

    /// `rho^2 / mu^3`, the per-second count variance.
    pub fn count_variance_rate(&self) -> f64 {
        self.rho2 / self.mean.powi(3)
    }
}

pub fn theoretical_rho2(model: &IsiModel) -> Result<TheoreticalMoments> {
    model.validate()?;
    Ok(match model {
        IsiModel::Renewal(m) => TheoreticalMoments::from_parts(m.mean, m.sd * m.sd, vec![], true),
        IsiModel::Ma(m) => {
            let var_x = m.base.variance();
            let a = &m.coeffs;
            let order = m.order();
            let variance = var_x * a.iter().map(|x| x * x).sum::<f64>();
            let autocov = (1..=order)
                .map(|lag| var_x * (0..=order - lag).map(|j| a[j] * a[j + lag]).sum::<f64>())
                .collect();
            TheoreticalMoments::from_parts(model.mean(), variance, autocov, true)
        }
        IsiModel::Jitter(m) => {
            let variance = (m.sigma1.powi(2) + 2.0 * m.sigma2.powi(2)) / 3.0;
            let autocov = if m.sigma2 > 0.0 {
                vec![-m.sigma2.powi(2) / 3.0]
            } else {
                vec![]
            };
            TheoreticalMoments::from_parts(m.nu, variance, autocov, true)
        }
        IsiModel::Bursty(_) => {
            let xs = isi_sample(model, MC_SAMPLE, MC_SEED)?;
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let cov = |lag: usize| {
                xs.iter()
                    .zip(&xs[lag..])
                    .map(|(a, b)| (a - mean) * (b - mean))
                    .sum::<f64>()
                    / (xs.len() - lag) as f64
            };
            TheoreticalMoments::from_parts(mean, cov(0), vec![cov(1), cov(2)], false)
        }
    })
}
