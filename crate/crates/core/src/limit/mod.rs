//! Monte Carlo calibration of the Brownian limit process
//! `L_{h,t} = ((W_{t+h} - W_t) - (W_t - W_{t-h})) / sqrt(2h)`.
//!
//! One Brownian path per simulation is shared by every window, so the joint
//! law of the per-window maxima `M*_h = max_t |L_{h,t}|` is preserved. The
//! rejection threshold `Q` is the `(1 - alpha)` quantile of
//! `max_h (M*_h - mean_h) / sd_h`.

mod bootstrap;
mod cache;

pub use bootstrap::{bootstrap_q, BootstrapSettings, BootstrapThreshold};
pub use cache::{decode_table, encode_table, ThresholdCache, CACHE_DIR_ENV};

use log::warn;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MftError, Result};
use crate::grid::WindowSet;
use crate::rng::stream_rng;

pub const DEFAULT_N_SIMS: usize = 10_000;
pub const RECOMMENDED_MIN_SIMS: usize = 1_000;
pub const TABLE_FORMAT_VERSION: u32 = 1;

/// Standard Brownian motion sampled at `0, dt, ..., steps * dt`.
pub fn brownian_path(steps: usize, dt: f64, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, stream);
    let sd = dt.sqrt();
    let mut w = Vec::with_capacity(steps + 1);
    let mut acc = 0.0;
    w.push(0.0);
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        acc += sd * z;
        w.push(acc);
    }
    w
}

/// `L_{h,t}` on the lattice points `t = k dt`, `k = h_steps ..= len - 1 - h_steps`.
pub fn limit_process(path: &[f64], h_steps: usize, dt: f64) -> Vec<f64> {
    let norm = 1.0 / (2.0 * h_steps as f64 * dt).sqrt();
    if path.len() < 2 * h_steps + 1 {
        return Vec::new();
    }
    (h_steps..path.len() - h_steps)
        .map(|k| ((path[k + h_steps] - path[k]) - (path[k] - path[k - h_steps])) * norm)
        .collect()
}

fn max_abs_limit(path: &[f64], h_steps: usize, dt: f64) -> f64 {
    let norm = 1.0 / (2.0 * h_steps as f64 * dt).sqrt();
    let mut best = 0.0f64;
    for k in h_steps..path.len() - h_steps {
        let v = ((path[k + h_steps] - path[k]) - (path[k] - path[k - h_steps])).abs();
        best = best.max(v);
    }
    best * norm
}

/// Per-simulation maxima `M*_h`, `maxima[sim][window]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitMaxima {
    pub windows: Vec<f64>,
    pub maxima: Vec<Vec<f64>>,
}

pub fn sim_limit_maxima(ws: &WindowSet, n_sims: usize, seed: u64) -> Result<LimitMaxima> {
    if n_sims == 0 {
        return Err(MftError::invalid("at least one simulation is required"));
    }
    let dt = ws.grid_step();
    let steps = ws.total_steps();
    let h_steps: Vec<usize> = ws.windows().iter().map(|&h| ws.steps(h)).collect();
    let maxima = (0..n_sims)
        .into_par_iter()
        .map(|sim| {
            let path = brownian_path(steps, dt, seed, sim as u64);
            h_steps
                .iter()
                .map(|&hs| max_abs_limit(&path, hs, dt))
                .collect()
        })
        .collect();
    Ok(LimitMaxima {
        windows: ws.windows().to_vec(),
        maxima,
    })
}

/// Type-1 empirical quantile of an ascending sample: the smallest value whose
/// empirical CDF reaches `p`. `p = 0` gives the minimum.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let n = sorted.len();
    let k = (p * n as f64 - 1e-9).ceil();
    let idx = if k < 1.0 {
        0
    } else {
        (k as usize - 1).min(n - 1)
    };
    sorted[idx]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMeta {
    pub version: u32,
    pub duration: f64,
    pub windows: Vec<f64>,
    pub grid_step: f64,
    pub alpha: f64,
    pub n_sims: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMoments {
    pub h: f64,
    /// Mean of `M*_h`.
    pub mean: f64,
    /// Standard deviation of `M*_h`.
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub meta: ThresholdMeta,
    pub rows: Vec<WindowMoments>,
    pub q: f64,
}

impl ThresholdTable {
    pub fn row(&self, h: f64) -> Option<&WindowMoments> {
        self.rows
            .iter()
            .find(|r| (r.h - h).abs() <= 1e-9 * h.max(1.0))
    }

    /// Errors unless the table was calibrated for these windows, length and grid.
    pub fn check_matches(&self, ws: &WindowSet) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        let m = &self.meta;
        if !close(m.duration, ws.duration()) {
            return Err(MftError::ThresholdMismatch(format!(
                "table for T = {}, train has T = {}",
                m.duration,
                ws.duration()
            )));
        }
        if !close(m.grid_step, ws.grid_step()) {
            return Err(MftError::ThresholdMismatch(format!(
                "table grid step {}, detection grid step {}",
                m.grid_step,
                ws.grid_step()
            )));
        }
        if m.windows.len() != ws.windows().len()
            || m.windows
                .iter()
                .zip(ws.windows())
                .any(|(a, b)| !close(*a, *b))
        {
            return Err(MftError::ThresholdMismatch(format!(
                "table windows {:?}, detection windows {:?}",
                m.windows,
                ws.windows()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.meta.version != TABLE_FORMAT_VERSION {
            return Err(MftError::Calibration(format!(
                "unsupported table version {}",
                self.meta.version
            )));
        }
        if self.rows.len() != self.meta.windows.len() {
            return Err(MftError::Calibration(
                "row count does not match windows".into(),
            ));
        }
        for r in &self.rows {
            if !(r.sd > 0.0 && r.sd.is_finite() && r.mean.is_finite()) {
                return Err(MftError::Calibration(format!(
                    "degenerate moments for h = {}",
                    r.h
                )));
            }
        }
        if !self.q.is_finite() {
            return Err(MftError::Calibration("threshold is not finite".into()));
        }
        if !(self.meta.alpha > 0.0 && self.meta.alpha <= 1.0) {
            return Err(MftError::Calibration("alpha outside (0, 1]".into()));
        }
        Ok(())
    }
}

/// Simulated maxima reduced to per-window moments and the standardized
/// maxima `max_h (M*_h - mean_h) / sd_h`, from which `Q` is read for any alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSample {
    pub windows: WindowSet,
    pub n_sims: usize,
    pub seed: u64,
    pub rows: Vec<WindowMoments>,
    /// Ascending.
    pub standardized_maxima: Vec<f64>,
}

impl CalibrationSample {
    pub fn threshold(&self, alpha: f64) -> f64 {
        empirical_quantile(&self.standardized_maxima, 1.0 - alpha)
    }

    pub fn table(&self, alpha: f64) -> Result<ThresholdTable> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(MftError::invalid(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        let table = ThresholdTable {
            meta: ThresholdMeta {
                version: TABLE_FORMAT_VERSION,
                duration: self.windows.duration(),
                windows: self.windows.windows().to_vec(),
                grid_step: self.windows.grid_step(),
                alpha,
                n_sims: self.n_sims,
                seed: self.seed,
            },
            rows: self.rows.clone(),
            q: self.threshold(alpha),
        };
        table.validate()?;
        Ok(table)
    }
}

pub fn calibrate(ws: &WindowSet, n_sims: usize, seed: u64) -> Result<CalibrationSample> {
    if n_sims < RECOMMENDED_MIN_SIMS {
        warn!(
            "{n_sims} limit simulations requested; at least {RECOMMENDED_MIN_SIMS} are recommended"
        );
    }
    let sims = sim_limit_maxima(ws, n_sims, seed)?;
    let n = n_sims as f64;
    let rows: Vec<WindowMoments> = ws
        .windows()
        .iter()
        .enumerate()
        .map(|(j, &h)| {
            let mean = sims.maxima.iter().map(|m| m[j]).sum::<f64>() / n;
            let var = sims
                .maxima
                .iter()
                .map(|m| (m[j] - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            WindowMoments {
                h,
                mean,
                sd: var.sqrt(),
            }
        })
        .collect();
    if let Some(bad) = rows.iter().find(|r| !(r.sd > 0.0 && r.sd.is_finite())) {
        return Err(MftError::Calibration(format!(
            "standard deviation of the maxima for h = {} is degenerate ({} simulations)",
            bad.h, n_sims
        )));
    }
    let mut standardized: Vec<f64> = sims
        .maxima
        .iter()
        .map(|m| {
            m.iter()
                .zip(&rows)
                .map(|(x, r)| (x - r.mean) / r.sd)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    standardized.sort_by(|a, b| a.total_cmp(b));
    Ok(CalibrationSample {
        windows: ws.clone(),
        n_sims,
        seed,
        rows,
        standardized_maxima: standardized,
    })
}

/// Threshold table for level `alpha`.
pub fn threshold_q(ws: &WindowSet, alpha: f64, n_sims: usize, seed: u64) -> Result<ThresholdTable> {
    calibrate(ws, n_sims, seed)?.table(alpha)
}
