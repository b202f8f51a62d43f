//! Change-point estimation: per-window successive maxima, then a cross-window
//! combination that prefers small windows.

use serde::{Deserialize, Serialize};

use super::field::{PointState, ScaledField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    pub time: f64,
    /// Window that detected it.
    pub h: f64,
    /// `R` at detection.
    pub r_value: f64,
}

fn within(a: f64, b: f64, h: f64) -> bool {
    (a - b).abs() <= h * (1.0 + 1e-12)
}

/// Repeatedly takes the largest remaining valid `R`; while it exceeds `q`,
/// records it and removes its closed `h`-neighbourhood. Ties go to the
/// earlier time. Output is sorted by time.
pub fn mfa_candidates(field: &ScaledField, q: f64) -> Vec<ChangePoint> {
    let mut available: Vec<bool> = field.mask.iter().map(|s| *s == PointState::Valid).collect();
    let mut found = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        for (k, &ok) in available.iter().enumerate() {
            if ok && best.is_none_or(|b| field.r[k] > field.r[b]) {
                best = Some(k);
            }
        }
        let Some(k) = best else { break };
        if !(field.r[k] > q) {
            break;
        }
        let c = field.grid[k];
        found.push(ChangePoint {
            time: c,
            h: field.h,
            r_value: field.r[k],
        });
        for (j, &t) in field.grid.iter().enumerate() {
            if within(t, c, field.h) {
                available[j] = false;
            }
        }
    }
    found.sort_by(|a, b| a.time.total_cmp(&b.time));
    found
}

/// Accepts every candidate of the smallest window, then, window by window in
/// ascending order, each candidate whose `[c - h, c + h]` holds no accepted
/// change point.
pub fn mfa_combine(candidates: &[ChangePoint]) -> Vec<ChangePoint> {
    let mut by_window: Vec<ChangePoint> = candidates.to_vec();
    by_window.sort_by(|a, b| a.h.total_cmp(&b.h).then(a.time.total_cmp(&b.time)));
    let mut accepted: Vec<ChangePoint> = Vec::new();
    let mut i = 0;
    while i < by_window.len() {
        let h = by_window[i].h;
        let mut j = i;
        while j < by_window.len() && by_window[j].h == h {
            j += 1;
        }
        let group = &by_window[i..j];
        let fresh: Vec<ChangePoint> = group
            .iter()
            .filter(|c| !accepted.iter().any(|a| within(a.time, c.time, h)))
            .copied()
            .collect();
        accepted.extend(fresh);
        i = j;
    }
    accepted.sort_by(|a, b| a.time.total_cmp(&b.time));
    accepted
}
