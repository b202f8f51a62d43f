//! Moving-block bootstrap of the test statistic under the null hypothesis.
//!
//! Blocks of consecutive intervals are drawn with replacement from the observed
//! train and concatenated until the replicate covers `[0, T]`. The threshold is
//! the `(1 - alpha)` quantile of the replicate statistics, with `alpha` taken
//! from the threshold table.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{empirical_quantile, ThresholdTable};
use crate::detect::{compute_fields, statistic, FieldSettings};
use crate::error::{MftError, Result};
use crate::grid::WindowSet;
use crate::rng::stream_rng;
use crate::train::SpikeTrain;

/// Fewest blocks the observed intervals must provide.
pub const MIN_BLOCKS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub n_boot: usize,
    /// `None` means `10 (m + 1)`.
    pub block_len: Option<usize>,
    pub seed: u64,
}

impl Default for BootstrapSettings {
    fn default() -> Self {
        BootstrapSettings {
            n_boot: 500,
            block_len: None,
            seed: 0,
        }
    }
}

impl BootstrapSettings {
    pub fn block_len_for(&self, m: usize) -> usize {
        self.block_len.unwrap_or(10 * (m + 1)).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapThreshold {
    pub q: f64,
    pub block_len: usize,
    /// Replicate statistics, ascending; undecidable replicates are dropped.
    pub replicate_m: Vec<f64>,
}

fn block_replicate<R: Rng + ?Sized>(
    isis: &[f64],
    block_len: usize,
    duration: f64,
    rng: &mut R,
) -> SpikeTrain {
    let starts = isis.len() - block_len + 1;
    let mut times = Vec::new();
    let mut t = 0.0;
    'fill: loop {
        let s = rng.random_range(0..starts);
        for &x in &isis[s..s + block_len] {
            let next = t + x;
            if next > duration {
                break 'fill;
            }
            if next > t {
                times.push(next);
                t = next;
            }
        }
    }
    SpikeTrain::from_sorted_unchecked(times, duration)
}

pub fn bootstrap_q(
    train: &SpikeTrain,
    ws: &WindowSet,
    table: &ThresholdTable,
    settings: FieldSettings,
    boot: &BootstrapSettings,
) -> Result<BootstrapThreshold> {
    if boot.n_boot == 0 {
        return Err(MftError::invalid(
            "at least one bootstrap replicate is required",
        ));
    }
    let isis = train.isis();
    let block_len = boot.block_len_for(settings.m);
    if isis.len() < MIN_BLOCKS * block_len {
        return Err(MftError::insufficient(format!(
            "{} intervals give fewer than {MIN_BLOCKS} blocks of length {block_len}",
            isis.len()
        )));
    }
    let values = isis.values();
    let stats: Vec<Option<f64>> = (0..boot.n_boot)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(boot.seed, b as u64);
            let rep = block_replicate(values, block_len, train.duration(), &mut rng);
            compute_fields(&rep, ws, table, settings).map(|f| statistic(&f))
        })
        .collect::<Result<_>>()?;
    let mut replicate_m: Vec<f64> = stats.into_iter().flatten().collect();
    if replicate_m.is_empty() {
        return Err(MftError::insufficient(
            "every bootstrap replicate was undecidable",
        ));
    }
    replicate_m.sort_by(|a, b| a.total_cmp(b));
    Ok(BootstrapThreshold {
        q: empirical_quantile(&replicate_m, 1.0 - table.meta.alpha),
        block_len,
        replicate_m,
    })
}
