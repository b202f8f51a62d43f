//! Generators for spike trains with m-dependent intervals, under a constant
//! rate or a piecewise-constant rate profile.
//!
//! All generators are deterministic given `(model, duration, seed)`. A
//! piecewise train draws segment `j` from stream `j` of the seed, so a
//! single-segment profile reproduces [`simulate`] exactly.

mod dist;
mod models;
mod theory;

pub use dist::PositiveDist;
pub use models::{BurstyModel, GammaRenewal, IsiModel, JitterModel, MaModel};
pub use theory::{theoretical_rho2, TheoreticalMoments};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{MftError, Result};
use crate::rng::{stream_rng, SimRng};
use crate::train::SpikeTrain;

/// A section of constant rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(flatten)]
    pub model: IsiModel,
    pub length: f64,
}

impl Segment {
    pub fn new(model: IsiModel, length: f64) -> Result<Self> {
        let s = Segment { model, length };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(MftError::invalid(format!(
                "segment length must be positive, got {}",
                self.length
            )));
        }
        self.model.validate()
    }

    /// Events per second, `1 / mu`.
    pub fn rate(&self) -> f64 {
        1.0 / self.model.mean()
    }
}

/// A simulated train with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub train: SpikeTrain,
    /// Segment boundaries strictly inside `(0, T)`.
    pub change_points: Vec<f64>,
    /// Intervals redrawn because a signed moving-average model produced a nonpositive value.
    pub resamples: u64,
}

/// Appends events on `(start, end]` from a fresh, independent copy of `model`.
///
/// Returns the number of resampled intervals. Successive times that coincide
/// in floating point (possible with very small Gamma draws) are separated by
/// one ulp to keep the train strictly increasing.
fn fill_segment(
    model: &IsiModel,
    start: f64,
    end: f64,
    rng: &mut SimRng,
    times: &mut Vec<f64>,
) -> Result<u64> {
    let mut generator = model.start(rng)?;
    let mut t = start;
    loop {
        let xi = generator.next_isi(rng)?;
        let mut next = t + xi;
        if next <= t {
            next = t.next_up();
        }
        if next > end {
            break;
        }
        times.push(next);
        t = next;
    }
    Ok(generator.resamples())
}

/// One stationary train of length `duration`.
pub fn simulate(model: &IsiModel, duration: f64, seed: u64) -> Result<SimulationOutput> {
    let segment = Segment::new(model.clone(), duration)?;
    sim_piecewise(std::slice::from_ref(&segment), seed)
}

/// Independent processes concatenated; change points at cumulative boundaries.
pub fn sim_piecewise(segments: &[Segment], seed: u64) -> Result<SimulationOutput> {
    if segments.is_empty() {
        return Err(MftError::invalid(
            "piecewise simulation needs at least one segment",
        ));
    }
    for s in segments {
        s.validate()?;
    }
    let mut times = Vec::new();
    let mut change_points = Vec::with_capacity(segments.len() - 1);
    let mut resamples = 0;
    let mut start = 0.0;
    for (j, seg) in segments.iter().enumerate() {
        if j > 0 {
            change_points.push(start);
        }
        let end = start + seg.length;
        let mut rng = stream_rng(seed, j as u64);
        resamples += fill_segment(&seg.model, start, end, &mut rng, &mut times)?;
        start = end;
    }
    if resamples > 0 {
        warn!("{resamples} nonpositive intervals were redrawn during simulation");
    }
    let train = if times.is_empty() {
        SpikeTrain::empty(start)?
    } else {
        SpikeTrain::from_sorted_unchecked(times, start)
    };
    Ok(SimulationOutput {
        train,
        change_points,
        resamples,
    })
}

pub fn sim_renewal(model: &GammaRenewal, duration: f64, seed: u64) -> Result<SpikeTrain> {
    Ok(simulate(&IsiModel::Renewal(model.clone()), duration, seed)?.train)
}

pub fn sim_ma(model: &MaModel, duration: f64, seed: u64) -> Result<SpikeTrain> {
    Ok(simulate(&IsiModel::Ma(model.clone()), duration, seed)?.train)
}

pub fn sim_jitter(model: &JitterModel, duration: f64, seed: u64) -> Result<SpikeTrain> {
    Ok(simulate(&IsiModel::Jitter(model.clone()), duration, seed)?.train)
}

pub fn sim_bursty(model: &BurstyModel, duration: f64, seed: u64) -> Result<SpikeTrain> {
    Ok(simulate(&IsiModel::Bursty(model.clone()), duration, seed)?.train)
}

/// `count` consecutive stationary intervals (no time bookkeeping).
pub fn isi_sample(model: &IsiModel, count: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = stream_rng(seed, 0);
    let mut generator = model.start(&mut rng)?;
    (0..count).map(|_| generator.next_isi(&mut rng)).collect()
}
