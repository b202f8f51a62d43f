//! Spike trains, the counting process and inter-spike intervals.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{MftError, Result};

/// Slack allowed when comparing window edges against the recording end,
/// so grid points computed as `h + k * dt` are not rejected for rounding.
const EDGE_SLACK: f64 = 1e-9;

/// Event times `0 < S_1 < ... < S_N <= T` observed on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    times: Vec<f64>,
    duration: f64,
}

impl SpikeTrain {
    /// Validated constructor. Empty trains are rejected; use [`SpikeTrain::empty`].
    pub fn new(times: Vec<f64>, duration: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(MftError::insufficient("spike train has no events"));
        }
        Self::validate(&times, duration)?;
        Ok(SpikeTrain { times, duration })
    }

    /// A train without events, for degenerate-input handling.
    pub fn empty(duration: f64) -> Result<Self> {
        Self::validate(&[], duration)?;
        Ok(SpikeTrain {
            times: Vec::new(),
            duration,
        })
    }

    /// Constructor for generators that guarantee the invariants themselves.
    pub(crate) fn from_sorted_unchecked(times: Vec<f64>, duration: f64) -> Self {
        debug_assert!(Self::validate(&times, duration).is_ok());
        SpikeTrain { times, duration }
    }

    fn validate(times: &[f64], duration: f64) -> Result<()> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(MftError::invalid(format!(
                "duration must be positive and finite, got {duration}"
            )));
        }
        if let Some(&first) = times.first() {
            if !(first > 0.0) {
                return Err(MftError::domain(format!(
                    "event times must be positive, first is {first}"
                )));
            }
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(MftError::domain(format!(
                    "event times must be strictly increasing (index {}: {} then {})",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        if let Some(&last) = times.last() {
            if !(last <= duration) {
                return Err(MftError::domain(format!(
                    "event time {last} exceeds duration {duration}"
                )));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// `N_T`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `N_t`: number of events in `(0, t]`.
    pub fn count_up_to(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t)
    }

    /// Number of events in the half-open interval `(a, b]`.
    pub fn count_events(&self, a: f64, b: f64) -> Result<usize> {
        self.check_interval(a, b)?;
        Ok(self.count_up_to(b) - self.count_up_to(a))
    }

    fn check_interval(&self, a: f64, b: f64) -> Result<()> {
        let slack = EDGE_SLACK * self.duration.max(1.0);
        if !(a >= -slack && a <= b && b <= self.duration + slack) {
            return Err(MftError::domain(format!(
                "interval ({a}, {b}] is not inside [0, {}]",
                self.duration
            )));
        }
        Ok(())
    }

    /// Inter-spike intervals `xi_1 = S_1`, `xi_i = S_i - S_{i-1}`.
    pub fn isis(&self) -> IsiSequence {
        let mut prev = 0.0;
        let values = self
            .times
            .iter()
            .map(|&s| {
                let d = s - prev;
                prev = s;
                d
            })
            .collect();
        IsiSequence { values, start: 0 }
    }

    /// Positions (0-based, into [`SpikeTrain::isis`]) of the intervals whose
    /// both endpoints lie in `(a, b]`.
    ///
    /// Interval `j` runs from `S_{j-1}` to `S_j` with `S_{-1} = 0`, so the
    /// first interval never belongs to a window: its left end is time 0.
    pub fn window_isi_range(&self, a: f64, b: f64) -> Range<usize> {
        let lo = self.count_up_to(a);
        let hi = self.count_up_to(b);
        if hi > lo + 1 {
            lo + 1..hi
        } else {
            hi..hi
        }
    }

    /// The intervals fully contained in `(a, b]`.
    pub fn window_isis(&self, a: f64, b: f64) -> Result<IsiSequence> {
        self.check_interval(a, b)?;
        if a >= b {
            return Err(MftError::domain(format!("empty window ({a}, {b}]")));
        }
        let range = self.window_isi_range(a, b);
        let values = range
            .clone()
            .map(|j| {
                let prev = if j == 0 { 0.0 } else { self.times[j - 1] };
                self.times[j] - prev
            })
            .collect();
        Ok(IsiSequence {
            values,
            start: range.start,
        })
    }

    /// The same events observed on `[0, T + delta]` with every time shifted by `delta`.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(MftError::invalid("shift must be nonnegative"));
        }
        let times = self.times.iter().map(|&s| s + delta).collect();
        SpikeTrain::new(times, self.duration + delta)
    }

    /// Events inside `(a, b]`, re-based so that `a` becomes time zero.
    pub fn restrict(&self, a: f64, b: f64) -> Result<Self> {
        self.check_interval(a, b)?;
        let lo = self.count_up_to(a);
        let hi = self.count_up_to(b);
        let times: Vec<f64> = self.times[lo..hi].iter().map(|&s| s - a).collect();
        if times.is_empty() {
            SpikeTrain::empty(b - a)
        } else {
            SpikeTrain::new(times, b - a)
        }
    }
}

/// Consecutive inter-spike intervals, in seconds.
///
/// `start` is the position of the first value in the whole-train numbering,
/// so disjoint windows can be compared by index.
#[derive(Debug, Clone, PartialEq)]
pub struct IsiSequence {
    values: Vec<f64>,
    start: usize,
}

impl IsiSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(MftError::domain(format!(
                "intervals must be positive and finite, found {bad}"
            )));
        }
        Ok(IsiSequence { values, start: 0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when no interval is available (empty train or sparse window).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Index positions of the values in whole-train numbering.
    pub fn indices(&self) -> Range<usize> {
        self.start..self.start + self.values.len()
    }

    /// Event times recovered by cumulative summation.
    pub fn cumulative_times(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.values
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
