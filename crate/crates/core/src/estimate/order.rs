//! Data-driven choice of the dependence order from windowed serial correlations.

use serde::{Deserialize, Serialize};

use super::wilcoxon::signed_rank_test;
use crate::error::{MftError, Result};
use crate::train::IsiSequence;

pub const DEFAULT_SECTION_LEN: usize = 50;
pub const DEFAULT_MAX_LAG: usize = 10;
pub const DEFAULT_ALPHA_M: f64 = 0.05;
pub const MIN_SECTIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderSettings {
    pub section_len: usize,
    pub max_lag: usize,
    pub alpha: f64,
}

impl Default for OrderSettings {
    fn default() -> Self {
        OrderSettings {
            section_len: DEFAULT_SECTION_LEN,
            max_lag: DEFAULT_MAX_LAG,
            alpha: DEFAULT_ALPHA_M,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSummary {
    pub lag: usize,
    /// One Pearson correlation per section with nonzero variance.
    pub correlations: Vec<f64>,
    pub median: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MOrderEstimate {
    pub m_hat: usize,
    pub sections: usize,
    pub per_lag: Vec<LagSummary>,
}

/// Pearson correlation of the pairs `(x_i, x_{i+lag})` inside one section.
pub fn lagged_correlation(xs: &[f64], lag: usize) -> Option<f64> {
    if xs.len() < lag + 2 {
        return None;
    }
    let a = &xs[..xs.len() - lag];
    let b = &xs[lag..];
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Splits the intervals into disjoint sections, tests each lag's section
/// correlations for a zero median and returns `m_hat = l* - 1`, where `l*` is
/// the smallest lag whose test is not significant at `alpha`. Pairs spanning
/// two sections are dropped.
pub fn estimate_m(isis: &IsiSequence, settings: &OrderSettings) -> Result<MOrderEstimate> {
    let OrderSettings {
        section_len,
        max_lag,
        alpha,
    } = *settings;
    if max_lag == 0 {
        return Err(MftError::invalid("max_lag must be at least 1"));
    }
    if section_len < max_lag + 3 {
        return Err(MftError::invalid(format!(
            "sections of {section_len} intervals are too short for lag {max_lag}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MftError::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let sections: Vec<&[f64]> = isis.values().chunks_exact(section_len).collect();
    if sections.len() < MIN_SECTIONS {
        return Err(MftError::insufficient(format!(
            "{} intervals give {} sections of {section_len}; at least {MIN_SECTIONS} are needed, \
             use a longer recording",
            isis.len(),
            sections.len()
        )));
    }
    let per_lag: Vec<LagSummary> = (1..=max_lag)
        .map(|lag| {
            let correlations: Vec<f64> = sections
                .iter()
                .filter_map(|s| lagged_correlation(s, lag))
                .collect();
            let p_value = signed_rank_test(&correlations).p_value;
            LagSummary {
                lag,
                median: median(&correlations),
                correlations,
                p_value,
            }
        })
        .collect();
    let m_hat = per_lag
        .iter()
        .find(|s| s.p_value >= alpha)
        .map_or(max_lag, |s| s.lag - 1);
    Ok(MOrderEstimate {
        m_hat,
        sections: sections.len(),
        per_lag,
    })
}
