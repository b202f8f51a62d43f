//! The window set `H` and the shared evaluation grid.

use serde::{Deserialize, Serialize};

use crate::error::{MftError, Result};

/// Default grid resolution: `min(H) / DEFAULT_STEPS_PER_WINDOW`.
pub const DEFAULT_STEPS_PER_WINDOW: f64 = 100.0;

const STEP_TOLERANCE: f64 = 1e-6;

/// A finite ascending set of half-window widths on a recording of length `T`,
/// with grid spacing `dt`.
///
/// Every `h` must be an integer multiple of `dt`, so the grid `h, h + dt, ...,
/// T - h` lines up exactly with the Brownian lattice used for calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSet {
    windows: Vec<f64>,
    grid_step: f64,
    duration: f64,
}

impl WindowSet {
    /// `grid_step = None` selects `min(H) / 100`.
    pub fn new(windows: &[f64], duration: f64, grid_step: Option<f64>) -> Result<Self> {
        if windows.is_empty() {
            return Err(MftError::invalid("window set is empty"));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(MftError::invalid(format!(
                "duration must be positive, got {duration}"
            )));
        }
        let mut ws: Vec<f64> = windows.to_vec();
        if ws.iter().any(|h| !h.is_finite()) {
            return Err(MftError::invalid("window sizes must be finite"));
        }
        ws.sort_by(|a, b| a.total_cmp(b));
        ws.dedup();
        let h_min = ws[0];
        let h_max = *ws.last().unwrap();
        if !(h_min > 0.0) {
            return Err(MftError::invalid(format!(
                "window sizes must be positive, got {h_min}"
            )));
        }
        if h_max > duration / 2.0 * (1.0 + 1e-12) {
            return Err(MftError::invalid(format!(
                "window {h_max} exceeds half the recording length {duration}"
            )));
        }
        let dt = grid_step.unwrap_or(h_min / DEFAULT_STEPS_PER_WINDOW);
        if !(dt.is_finite() && dt > 0.0) {
            return Err(MftError::invalid(format!(
                "grid step must be positive, got {dt}"
            )));
        }
        if dt > h_min / 2.0 {
            return Err(MftError::invalid(format!(
                "grid step {dt} is coarser than half the smallest window {h_min}"
            )));
        }
        for &h in &ws {
            let ratio = h / dt;
            if (ratio - ratio.round()).abs() > STEP_TOLERANCE * ratio.max(1.0) {
                return Err(MftError::invalid(format!(
                    "window {h} is not an integer multiple of the grid step {dt}"
                )));
            }
        }
        let set = WindowSet {
            windows: ws,
            grid_step: dt,
            duration,
        };
        if set
            .windows
            .iter()
            .any(|&h| set.total_steps() < 2 * set.steps(h))
        {
            return Err(MftError::invalid(
                "evaluation grid is empty for some window",
            ));
        }
        Ok(set)
    }

    pub fn windows(&self) -> &[f64] {
        &self.windows
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn min_window(&self) -> f64 {
        self.windows[0]
    }

    /// `h / dt` as a lattice step count.
    pub fn steps(&self, h: f64) -> usize {
        (h / self.grid_step).round() as usize
    }

    /// Number of lattice steps covering `[0, T]`.
    pub fn total_steps(&self) -> usize {
        (self.duration / self.grid_step + STEP_TOLERANCE).floor() as usize
    }

    pub fn grid_len(&self, h: f64) -> usize {
        self.total_steps() - 2 * self.steps(h) + 1
    }

    /// Evaluation times `t_k = h + k dt` for `t` in `[h, T - h]`.
    pub fn grid(&self, h: f64) -> Vec<f64> {
        let dt = self.grid_step;
        (0..self.grid_len(h)).map(|k| h + k as f64 * dt).collect()
    }

    /// Same windows and spacing on a recording of a different length.
    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        WindowSet::new(&self.windows, duration, Some(self.grid_step))
    }
}
