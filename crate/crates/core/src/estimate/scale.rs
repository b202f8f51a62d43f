//! Estimators of the standard deviation `s` of `N_ri - N_le`.

use serde::{Deserialize, Serialize};

use super::moments::{scale_component, MomentEstimates};
use crate::error::{MftError, Result};
use crate::train::SpikeTrain;

/// Global estimate `sqrt(2 h rho_hat^2 / mu_hat^3)` from all intervals of the
/// train. `None` when the estimate is undefined (negative `rho_hat^2` or too
/// few intervals for order `m`).
pub fn s_hat_global(train: &SpikeTrain, h: f64, m: usize) -> Option<f64> {
    let est = MomentEstimates::compute(&train.isis(), m)?;
    let c = est.scale_component()?;
    Some((2.0 * h * c).sqrt())
}

/// Local scale at `t`: each side estimated from its own window's intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalScale {
    pub t: f64,
    pub h: f64,
    /// `rho_hat_le^2 / mu_hat_le^3`; `None` if undefined.
    pub s2_left: Option<f64>,
    /// `rho_hat_ri^2 / mu_hat_ri^3`; `None` if undefined.
    pub s2_right: Option<f64>,
    /// `sqrt((s2_left + s2_right) h)`; `None` is UNDEFINED, `Some(0.0)` is degenerate.
    pub s_hat: Option<f64>,
}

impl LocalScale {
    pub(crate) fn combine(t: f64, h: f64, left: Option<f64>, right: Option<f64>) -> Self {
        let s_hat = match (left, right) {
            (Some(l), Some(r)) => Some(((l + r) * h).sqrt()),
            _ => None,
        };
        LocalScale {
            t,
            h,
            s2_left: left,
            s2_right: right,
            s_hat,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.s_hat.is_some()
    }
}

fn side_component(
    train: &SpikeTrain,
    a: f64,
    b: f64,
    m: usize,
    min_isis: usize,
) -> Result<Option<f64>> {
    let isis = train.window_isis(a, b)?;
    if isis.len() < min_isis.max(m + 2) {
        return Ok(None);
    }
    Ok(MomentEstimates::compute(&isis, m).and_then(|e| scale_component(e.mu_hat, e.rho2_hat)))
}

/// Local estimate at `t`, requiring at least `m + 2` intervals per side.
pub fn s_hat_local(train: &SpikeTrain, t: f64, h: f64, m: usize) -> Result<LocalScale> {
    s_hat_local_with_min(train, t, h, m, m + 2)
}

/// As [`s_hat_local`] with a larger per-side minimum interval count.
pub fn s_hat_local_with_min(
    train: &SpikeTrain,
    t: f64,
    h: f64,
    m: usize,
    min_isis: usize,
) -> Result<LocalScale> {
    let slack = 1e-9 * train.duration().max(1.0);
    if !(h > 0.0 && t >= h - slack && t <= train.duration() - h + slack) {
        return Err(MftError::domain(format!(
            "t = {t} outside [h, T - h] for h = {h}, T = {}",
            train.duration()
        )));
    }
    let left = side_component(train, (t - h).max(0.0), t, m, min_isis)?;
    let right = side_component(train, t, (t + h).min(train.duration()), m, min_isis)?;
    Ok(LocalScale::combine(t, h, left, right))
}
