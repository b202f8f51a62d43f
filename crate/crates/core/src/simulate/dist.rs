use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{MftError, Result};

/// A distribution on `(0, inf)` used for interval building blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum PositiveDist {
    Gamma { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { mean: f64 },
    Constant { value: f64 },
}

impl PositiveDist {
    /// Uniform distribution with the given mean and standard deviation.
    pub fn uniform_with_moments(mean: f64, sd: f64) -> Result<Self> {
        let half = 3f64.sqrt() * sd;
        let d = PositiveDist::Uniform {
            low: mean - half,
            high: mean + half,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PositiveDist::Gamma { mean, sd } => {
                mean > 0.0 && sd > 0.0 && mean.is_finite() && sd.is_finite()
            }
            PositiveDist::Uniform { low, high } => low >= 0.0 && high > low && high.is_finite(),
            PositiveDist::Exponential { mean } => mean > 0.0 && mean.is_finite(),
            PositiveDist::Constant { value } => value > 0.0 && value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(MftError::invalid(format!(
                "invalid positive distribution {self:?}"
            )))
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            PositiveDist::Gamma { mean, .. } => mean,
            PositiveDist::Uniform { low, high } => 0.5 * (low + high),
            PositiveDist::Exponential { mean } => mean,
            PositiveDist::Constant { value } => value,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            PositiveDist::Gamma { sd, .. } => sd * sd,
            PositiveDist::Uniform { low, high } => (high - low).powi(2) / 12.0,
            PositiveDist::Exponential { mean } => mean * mean,
            PositiveDist::Constant { .. } => 0.0,
        }
    }

    pub(crate) fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match *self {
            PositiveDist::Gamma { mean, sd } => {
                let shape = (mean / sd).powi(2);
                let scale = sd * sd / mean;
                Sampler::Gamma(
                    Gamma::new(shape, scale)
                        .map_err(|e| MftError::invalid(format!("gamma: {e}")))?,
                )
            }
            PositiveDist::Uniform { low, high } => Sampler::Uniform(
                Uniform::new(low, high).map_err(|e| MftError::invalid(format!("uniform: {e}")))?,
            ),
            PositiveDist::Exponential { mean } => Sampler::Exp(
                Exp::new(1.0 / mean).map_err(|e| MftError::invalid(format!("exponential: {e}")))?,
            ),
            PositiveDist::Constant { value } => Sampler::Constant(value),
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Sampler {
    Gamma(Gamma<f64>),
    Uniform(Uniform<f64>),
    Exp(Exp<f64>),
    Constant(f64),
}

impl Sampler {
    /// Symmetric uniform on `[center - half, center + half]`; a point mass when `half == 0`.
    pub(crate) fn symmetric(center: f64, half: f64) -> Result<Self> {
        if half == 0.0 {
            Ok(Sampler::Constant(center))
        } else {
            Uniform::new(center - half, center + half)
                .map(Sampler::Uniform)
                .map_err(|e| MftError::invalid(format!("uniform: {e}")))
        }
    }

    #[inline]
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::Uniform(d) => d.sample(rng),
            Sampler::Exp(d) => d.sample(rng),
            Sampler::Constant(v) => *v,
        }
    }
}
