//! The filtered-derivative field `G_{h,t} = (N_ri - N_le) / s_hat_{h,t}` and its
//! rescaled version `R_{h,t} = (|G_{h,t}| - mean_h) / sd_h`.

use serde::{Deserialize, Serialize};

use crate::error::{MftError, Result};
use crate::estimate::{scale_component, LocalScale, MomentEstimates, PrefixMoments};
use crate::limit::WindowMoments;
use crate::train::SpikeTrain;

/// How `s_hat` is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMethod {
    /// Separate estimates from the left and right window at every `t`.
    #[default]
    Local,
    /// One estimate from the whole train.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointState {
    Valid,
    /// `s_hat = 0`; `G` set to zero.
    Zeroed,
    /// Undefined `s_hat` at or within `h` of this point; `G` set to zero.
    Masked,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSettings {
    /// Dependence order used in `rho_hat^2`.
    pub m: usize,
    pub scale: ScaleMethod,
    /// Zero the whole `h`-neighbourhood of undefined points (otherwise only the point).
    pub mask_undefined: bool,
    /// Minimum intervals per side for a defined local estimate; `None` means `m + 5`.
    pub min_side_isis: Option<usize>,
}

impl FieldSettings {
    pub fn new(m: usize) -> Self {
        FieldSettings {
            m,
            scale: ScaleMethod::Local,
            mask_undefined: true,
            min_side_isis: None,
        }
    }

    pub fn min_side(&self) -> usize {
        self.min_side_isis.unwrap_or(self.m + 5).max(self.m + 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledField {
    pub h: f64,
    pub grid: Vec<f64>,
    /// `N_ri - N_le`.
    pub diff: Vec<i64>,
    /// `s_hat` per point; `None` where undefined.
    pub s_hat: Vec<Option<f64>>,
    pub g: Vec<f64>,
    pub r: Vec<f64>,
    pub mask: Vec<PointState>,
}

impl ScaledField {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Largest `R` over valid points.
    pub fn max_valid_r(&self) -> Option<f64> {
        self.r
            .iter()
            .zip(&self.mask)
            .filter(|(_, s)| **s == PointState::Valid)
            .map(|(r, _)| *r)
            .fold(None, |acc: Option<f64>, r| {
                Some(acc.map_or(r, |a| a.max(r)))
            })
    }

    pub fn fraction(&self, state: PointState) -> f64 {
        if self.mask.is_empty() {
            return 0.0;
        }
        self.mask.iter().filter(|s| **s == state).count() as f64 / self.mask.len() as f64
    }
}

/// A train with the interval prefix sums needed for fast local estimation.
pub struct PreparedTrain<'a> {
    train: &'a SpikeTrain,
    prefix: PrefixMoments,
    settings: FieldSettings,
    global_component: Option<f64>,
}

impl<'a> PreparedTrain<'a> {
    pub fn new(train: &'a SpikeTrain, settings: FieldSettings) -> Self {
        let isis = train.isis();
        let prefix = PrefixMoments::new(isis.values(), settings.m);
        let global_component = match settings.scale {
            ScaleMethod::Global => MomentEstimates::from_values(isis.values(), settings.m)
                .and_then(|e| e.scale_component()),
            ScaleMethod::Local => None,
        };
        PreparedTrain {
            train,
            prefix,
            settings,
            global_component,
        }
    }

    pub fn train(&self) -> &SpikeTrain {
        self.train
    }

    pub fn settings(&self) -> &FieldSettings {
        &self.settings
    }

    fn side_component(&self, a: f64, b: f64) -> Option<f64> {
        let range = self.train.window_isi_range(a, b);
        if range.len() < self.settings.min_side() {
            return None;
        }
        let (mu, rho2) = self
            .prefix
            .mean_and_rho2(range.start, range.end, self.settings.m)?;
        scale_component(mu, rho2)
    }

    /// Scale estimate at `t` for window `h`.
    pub fn local_scale(&self, t: f64, h: f64) -> LocalScale {
        match self.settings.scale {
            ScaleMethod::Local => {
                let left = self.side_component(t - h, t);
                let right = self.side_component(t, t + h);
                LocalScale::combine(t, h, left, right)
            }
            ScaleMethod::Global => {
                let half = self.global_component;
                LocalScale::combine(t, h, half, half)
            }
        }
    }

    /// `G` and `R` for window `h` on `grid`, rescaled with `row`.
    pub fn field(&self, h: f64, grid: &[f64], row: &WindowMoments) -> Result<ScaledField> {
        if (row.h - h).abs() > 1e-9 * h.max(1.0) {
            return Err(MftError::ThresholdMismatch(format!(
                "threshold row for h = {} used with h = {h}",
                row.h
            )));
        }
        let duration = self.train.duration();
        let slack = 1e-9 * duration.max(1.0);
        if let (Some(&first), Some(&last)) = (grid.first(), grid.last()) {
            if first - h < -slack || last + h > duration + slack {
                return Err(MftError::domain(format!(
                    "grid [{first}, {last}] leaves [h, T - h] for h = {h}, T = {duration}"
                )));
            }
        }
        let n = grid.len();
        let mut diff = Vec::with_capacity(n);
        let mut s_hat = Vec::with_capacity(n);
        for &t in grid {
            let lo = self.train.count_up_to(t - h) as i64;
            let mid = self.train.count_up_to(t) as i64;
            let hi = self.train.count_up_to(t + h) as i64;
            diff.push((hi - mid) - (mid - lo));
            s_hat.push(self.local_scale(t, h).s_hat);
        }

        let mut mask: Vec<PointState> = s_hat
            .iter()
            .map(|s| match s {
                Some(v) if *v > 0.0 => PointState::Valid,
                Some(_) => PointState::Zeroed,
                None => PointState::Masked,
            })
            .collect();
        if self.settings.mask_undefined {
            let reach = h * (1.0 + 1e-12);
            let mut cover = vec![0i64; n + 1];
            for (u, s) in s_hat.iter().enumerate() {
                if s.is_none() {
                    let tu = grid[u];
                    let lo = grid.partition_point(|&t| t < tu - reach);
                    let hi = grid.partition_point(|&t| t <= tu + reach);
                    cover[lo] += 1;
                    cover[hi] -= 1;
                }
            }
            let mut running = 0;
            for (k, state) in mask.iter_mut().enumerate() {
                running += cover[k];
                if running > 0 {
                    *state = PointState::Masked;
                }
            }
        }

        let mut g = vec![0.0; n];
        for k in 0..n {
            if mask[k] == PointState::Valid {
                g[k] = diff[k] as f64 / s_hat[k].expect("valid point has a scale");
            }
        }
        let r = g.iter().map(|x| (x.abs() - row.mean) / row.sd).collect();
        Ok(ScaledField {
            h,
            grid: grid.to_vec(),
            diff,
            s_hat,
            g,
            r,
            mask,
        })
    }
}

/// `G` and `R` for one window on an explicit grid.
pub fn g_field(
    train: &SpikeTrain,
    h: f64,
    grid: &[f64],
    row: &WindowMoments,
    settings: FieldSettings,
) -> Result<ScaledField> {
    PreparedTrain::new(train, settings).field(h, grid, row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::s_hat_local_with_min;

    fn row(h: f64) -> WindowMoments {
        WindowMoments {
            h,
            mean: 2.0,
            sd: 0.5,
        }
    }

    #[test]
    fn periodic_train_is_zeroed() {
        let times: Vec<f64> = (1..=1200).map(|k| k as f64 * 0.25).collect();
        let train = SpikeTrain::new(times, 300.0).unwrap();
        let grid: Vec<f64> = (0..=200).map(|k| 50.0 + k as f64).collect();
        let f = g_field(&train, 50.0, &grid, &row(50.0), FieldSettings::new(1)).unwrap();
        assert!(f.mask.iter().all(|s| *s == PointState::Zeroed));
        assert!(f.g.iter().all(|g| *g == 0.0));
        assert!(f.max_valid_r().is_none());
    }

    #[test]
    fn fast_local_scale_matches_direct() {
        let mut times = Vec::new();
        let mut t = 0.0;
        let mut k = 0u64;
        while t < 200.0 {
            k = k
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            t += 0.05 + (k >> 40) as f64 / (1u64 << 24) as f64 * 0.3;
            if t <= 200.0 {
                times.push(t);
            }
        }
        let train = SpikeTrain::new(times, 200.0).unwrap();
        for m in [0usize, 2] {
            let settings = FieldSettings::new(m);
            let prep = PreparedTrain::new(&train, settings);
            for &t in &[20.0, 57.3, 100.0, 180.0] {
                let fast = prep.local_scale(t, 20.0);
                let direct = s_hat_local_with_min(&train, t, 20.0, m, settings.min_side()).unwrap();
                match (fast.s_hat, direct.s_hat) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9 * b.max(1.0)),
                    (None, None) => {}
                    other => panic!("{other:?}"),
                }
            }
        }
    }

    #[test]
    fn undefined_point_masks_neighbourhood() {
        // Dense regular spikes with a gap: windows touching the gap lack intervals.
        let mut times: Vec<f64> = (1..=400)
            .map(|k| k as f64 * 0.1 + 0.001 * (k % 3) as f64)
            .collect();
        times.extend((1..=390).map(|k| 60.0 + k as f64 * 0.1 + 0.001 * (k % 3) as f64));
        let train = SpikeTrain::new(times, 100.0).unwrap();
        let grid: Vec<f64> = (0..=80).map(|k| 10.0 + k as f64).collect();
        let settings = FieldSettings::new(0);
        let f = g_field(&train, 10.0, &grid, &row(10.0), settings).unwrap();
        let undefined: Vec<f64> = grid
            .iter()
            .zip(&f.s_hat)
            .filter(|(_, s)| s.is_none())
            .map(|(t, _)| *t)
            .collect();
        assert!(!undefined.is_empty());
        for (k, &t) in grid.iter().enumerate() {
            let near = undefined.iter().any(|u| (u - t).abs() <= 10.0);
            assert_eq!(f.mask[k] == PointState::Masked, near, "t = {t}");
            if f.mask[k] != PointState::Valid {
                assert_eq!(f.g[k], 0.0);
            }
        }
        let unmasked = g_field(
            &train,
            10.0,
            &grid,
            &row(10.0),
            FieldSettings {
                mask_undefined: false,
                ..settings
            },
        )
        .unwrap();
        let masked_count = unmasked
            .mask
            .iter()
            .filter(|s| **s == PointState::Masked)
            .count();
        assert_eq!(masked_count, undefined.len());
    }

    #[test]
    fn grid_outside_recording_is_rejected() {
        let train = SpikeTrain::new(vec![1.0, 2.0, 3.0], 10.0).unwrap();
        assert!(g_field(&train, 2.0, &[1.0], &row(2.0), FieldSettings::new(0)).is_err());
        assert!(g_field(&train, 2.0, &[5.0], &row(3.0), FieldSettings::new(0)).is_err());
    }
}
