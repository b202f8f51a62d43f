//! Interval models and their stateful generators.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dist::{PositiveDist, Sampler};
use crate::error::{MftError, Result};

/// Resample attempts per interval before a signed moving-average model is
/// declared unable to produce positive intervals.
const MAX_RESAMPLES_PER_ISI: u64 = 10_000;

/// Renewal process with i.i.d. Gamma intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRenewal {
    pub mean: f64,
    pub sd: f64,
}

/// Moving-average intervals `xi_i = sum_j a_j X_{i-j}` with i.i.d. positive `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaModel {
    pub coeffs: Vec<f64>,
    pub base: PositiveDist,
}

/// Jittered beats: `xi_i = U_i + Z_i - Z_{i-1}` with
/// `U ~ U[nu - sigma1, nu + sigma1]` and `Z ~ U[-sigma2, sigma2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JitterModel {
    pub nu: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

/// Oscillatory bursting: a long interval `X` is followed by short ones `Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstyModel {
    pub p_i: f64,
    pub p_j: f64,
    pub dist_x: PositiveDist,
    pub dist_y: PositiveDist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum IsiModel {
    Renewal(GammaRenewal),
    Ma(MaModel),
    Jitter(JitterModel),
    Bursty(BurstyModel),
}

impl GammaRenewal {
    pub fn validate(&self) -> Result<()> {
        PositiveDist::Gamma {
            mean: self.mean,
            sd: self.sd,
        }
        .validate()
    }
}

impl MaModel {
    /// Coefficients `c^0, ..., c^m`.
    pub fn geometric_coeffs(c: f64, m: usize) -> Vec<f64> {
        (0..=m).map(|k| c.powi(k as i32)).collect()
    }

    /// Gamma base chosen so the intervals have the given mean and standard deviation.
    pub fn gamma_with_isi_moments(coeffs: Vec<f64>, mean: f64, sd: f64) -> Result<Self> {
        let (mx, sx) = Self::base_moments(&coeffs, mean, sd)?;
        let model = MaModel {
            coeffs,
            base: PositiveDist::Gamma { mean: mx, sd: sx },
        };
        model.validate()?;
        Ok(model)
    }

    /// Uniform base chosen so the intervals have the given mean and standard deviation.
    pub fn uniform_with_isi_moments(coeffs: Vec<f64>, mean: f64, sd: f64) -> Result<Self> {
        let (mx, sx) = Self::base_moments(&coeffs, mean, sd)?;
        let model = MaModel {
            coeffs,
            base: PositiveDist::uniform_with_moments(mx, sx)?,
        };
        model.validate()?;
        Ok(model)
    }

    fn base_moments(coeffs: &[f64], mean: f64, sd: f64) -> Result<(f64, f64)> {
        let sum: f64 = coeffs.iter().sum();
        let sum_sq: f64 = coeffs.iter().map(|a| a * a).sum();
        if !(sum > 0.0 && sum_sq > 0.0) {
            return Err(MftError::invalid("coefficients must have a positive sum"));
        }
        Ok((mean / sum, sd / sum_sq.sqrt()))
    }

    /// Dependence order `m`.
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        match self.coeffs.first() {
            None => return Err(MftError::invalid("moving-average model needs coefficients")),
            Some(&0.0) => return Err(MftError::invalid("a_0 must be nonzero")),
            _ => {}
        }
        if self.coeffs.iter().any(|a| !a.is_finite()) {
            return Err(MftError::invalid("coefficients must be finite"));
        }
        if self.coeffs.iter().sum::<f64>() <= 0.0 {
            return Err(MftError::invalid("coefficients must have a positive sum"));
        }
        self.base.validate()
    }
}

impl JitterModel {
    pub fn validate(&self) -> Result<()> {
        let finite = self.nu.is_finite() && self.sigma1.is_finite() && self.sigma2.is_finite();
        if !(finite && self.nu > 0.0 && self.sigma1 >= 0.0 && self.sigma2 >= 0.0) {
            return Err(MftError::invalid(format!(
                "invalid jitter parameters {self:?}"
            )));
        }
        if self.sigma1 + 2.0 * self.sigma2 > self.nu * (1.0 + 1e-12) {
            return Err(MftError::invalid(format!(
                "positivity condition sigma1 + 2 sigma2 <= nu violated ({} + 2*{} > {})",
                self.sigma1, self.sigma2, self.nu
            )));
        }
        Ok(())
    }
}

impl BurstyModel {
    pub fn validate(&self) -> Result<()> {
        for p in [self.p_i, self.p_j] {
            if !(0.0..=1.0).contains(&p) {
                return Err(MftError::invalid(format!("probability {p} outside [0, 1]")));
            }
        }
        self.dist_x.validate()?;
        self.dist_y.validate()
    }

    /// Closed-form interval mean.
    ///
    /// The long-interval term and the first short term are mutually exclusive
    /// (they require `I_{i-1} = 0` and `I_{i-1} = 1`); the second short term is
    /// independent of both.
    pub fn mean(&self) -> f64 {
        let (p, q) = (self.p_i, self.p_j);
        let p_long = p * (1.0 - p);
        let p_short = p * q;
        let p_none = (1.0 - p_long - p_short) * (1.0 - p_short);
        p_long * self.dist_x.mean() + (2.0 * p_short + p_none) * self.dist_y.mean()
    }
}

impl IsiModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            IsiModel::Renewal(m) => m.validate(),
            IsiModel::Ma(m) => m.validate(),
            IsiModel::Jitter(m) => m.validate(),
            IsiModel::Bursty(m) => m.validate(),
        }
    }

    /// Expected interval length `mu`.
    pub fn mean(&self) -> f64 {
        match self {
            IsiModel::Renewal(m) => m.mean,
            IsiModel::Ma(m) => m.base.mean() * m.coeffs.iter().sum::<f64>(),
            IsiModel::Jitter(m) => m.nu,
            IsiModel::Bursty(m) => m.mean(),
        }
    }

    /// Range of serial dependence.
    pub fn dependence_order(&self) -> usize {
        match self {
            IsiModel::Renewal(_) => 0,
            IsiModel::Ma(m) => m.order(),
            IsiModel::Jitter(m) => usize::from(m.sigma2 > 0.0),
            IsiModel::Bursty(_) => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IsiModel::Renewal(_) => "renewal",
            IsiModel::Ma(_) => "ma",
            IsiModel::Jitter(_) => "jitter",
            IsiModel::Bursty(_) => "bursty",
        }
    }

    /// A generator positioned at the start of a stationary interval sequence.
    pub(crate) fn start<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<IsiGenerator> {
        self.validate()?;
        Ok(match self {
            IsiModel::Renewal(m) => IsiGenerator::Renewal(
                PositiveDist::Gamma {
                    mean: m.mean,
                    sd: m.sd,
                }
                .sampler()?,
            ),
            IsiModel::Ma(m) => {
                let base = m.base.sampler()?;
                // history holds X_{i-1}, ..., X_{i-m}, most recent first
                let history: VecDeque<f64> = (0..m.order()).map(|_| base.sample(rng)).collect();
                IsiGenerator::Ma {
                    coeffs: m.coeffs.clone(),
                    base,
                    history,
                    resamples: 0,
                }
            }
            IsiModel::Jitter(m) => {
                let u = Sampler::symmetric(m.nu, m.sigma1)?;
                let z = Sampler::symmetric(0.0, m.sigma2)?;
                let prev_z = z.sample(rng);
                IsiGenerator::Jitter { u, z, prev_z }
            }
            IsiModel::Bursty(m) => {
                let i_prev2 = rng.random_bool(m.p_i);
                let i_prev1 = rng.random_bool(m.p_i);
                IsiGenerator::Bursty {
                    p_i: m.p_i,
                    p_j: m.p_j,
                    x: m.dist_x.sampler()?,
                    y: m.dist_y.sampler()?,
                    i_prev1,
                    i_prev2,
                }
            }
        })
    }
}

pub(crate) enum IsiGenerator {
    Renewal(Sampler),
    Ma {
        coeffs: Vec<f64>,
        base: Sampler,
        history: VecDeque<f64>,
        resamples: u64,
    },
    Jitter {
        u: Sampler,
        z: Sampler,
        prev_z: f64,
    },
    Bursty {
        p_i: f64,
        p_j: f64,
        x: Sampler,
        y: Sampler,
        i_prev1: bool,
        i_prev2: bool,
    },
}

impl IsiGenerator {
    pub(crate) fn next_isi<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        match self {
            IsiGenerator::Renewal(s) => Ok(s.sample(rng)),
            IsiGenerator::Ma {
                coeffs,
                base,
                history,
                resamples,
            } => {
                let tail: f64 = coeffs[1..]
                    .iter()
                    .zip(history.iter())
                    .map(|(a, x)| a * x)
                    .sum();
                let mut attempts = 0;
                loop {
                    let x = base.sample(rng);
                    let xi = coeffs[0] * x + tail;
                    if xi > 0.0 {
                        if !coeffs[1..].is_empty() {
                            history.pop_back();
                            history.push_front(x);
                        }
                        return Ok(xi);
                    }
                    *resamples += 1;
                    attempts += 1;
                    if attempts >= MAX_RESAMPLES_PER_ISI {
                        return Err(MftError::invalid(
                            "moving-average coefficients do not produce positive intervals",
                        ));
                    }
                }
            }
            IsiGenerator::Jitter { u, z, prev_z } => {
                let zi = z.sample(rng);
                let xi = u.sample(rng) + zi - *prev_z;
                *prev_z = zi;
                Ok(xi)
            }
            IsiGenerator::Bursty {
                p_i,
                p_j,
                x,
                y,
                i_prev1,
                i_prev2,
            } => {
                let ii = rng.random_bool(*p_i);
                let jj = rng.random_bool(*p_j);
                let jj2 = rng.random_bool(*p_j);
                let long = ii && !*i_prev1;
                let short1 = *i_prev1 && jj;
                let short2 = *i_prev2 && jj2;
                let mut xi = 0.0;
                if long {
                    xi += x.sample(rng);
                }
                if short1 {
                    xi += y.sample(rng);
                }
                if short2 {
                    xi += y.sample(rng);
                }
                if !(long || short1 || short2) {
                    xi += y.sample(rng);
                }
                *i_prev2 = *i_prev1;
                *i_prev1 = ii;
                Ok(xi)
            }
        }
    }

    pub(crate) fn resamples(&self) -> u64 {
        match self {
            IsiGenerator::Ma { resamples, .. } => *resamples,
            _ => 0,
        }
    }
}
