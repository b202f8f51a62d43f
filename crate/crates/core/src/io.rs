//! Plain-text spike-train files: one ascending time per line, with an optional
//! `# T=<duration>` header. Other `#` lines and blank lines are ignored.

use std::fs;
use std::path::Path;

use crate::error::{MftError, Result};
use crate::train::SpikeTrain;

fn parse_err(line: usize, message: impl Into<String>) -> MftError {
    MftError::Parse {
        line,
        message: message.into(),
    }
}

/// Parses a spike-train file. Without a header, `T` is the last time rounded
/// up to the next whole second.
pub fn parse_spike_train(text: &str) -> Result<SpikeTrain> {
    let mut duration: Option<(usize, f64)> = None;
    let mut times: Vec<f64> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(value) = comment
                .strip_prefix("T=")
                .or_else(|| comment.strip_prefix("T ="))
            {
                if duration.is_some() {
                    return Err(parse_err(line_no, "duplicate T header"));
                }
                if !times.is_empty() {
                    return Err(parse_err(line_no, "T header after the first event"));
                }
                let t: f64 = value.trim().parse().map_err(|_| {
                    parse_err(line_no, format!("invalid duration `{}`", value.trim()))
                })?;
                if !(t.is_finite() && t > 0.0) {
                    return Err(parse_err(
                        line_no,
                        format!("duration must be positive, got {t}"),
                    ));
                }
                duration = Some((line_no, t));
            }
            continue;
        }
        let t: f64 = line
            .parse()
            .map_err(|_| parse_err(line_no, format!("invalid event time `{line}`")))?;
        if !t.is_finite() {
            return Err(parse_err(
                line_no,
                format!("event time `{line}` is not finite"),
            ));
        }
        if t <= 0.0 {
            return Err(parse_err(
                line_no,
                format!("event time {t} is not positive"),
            ));
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(parse_err(
                    line_no,
                    format!("event time {t} does not exceed previous {prev}"),
                ));
            }
        }
        if let Some((_, d)) = duration {
            if t > d {
                return Err(parse_err(
                    line_no,
                    format!("event time {t} exceeds T = {d}"),
                ));
            }
        }
        times.push(t);
        last_line = line_no;
    }
    match duration {
        Some((_, d)) if times.is_empty() => SpikeTrain::empty(d),
        Some((_, d)) => SpikeTrain::new(times, d),
        None => {
            let last = *times
                .last()
                .ok_or_else(|| parse_err(last_line.max(1), "no events and no T header"))?;
            SpikeTrain::new(times, last.ceil())
        }
    }
}

pub fn read_spike_train(path: impl AsRef<Path>) -> Result<SpikeTrain> {
    parse_spike_train(&fs::read_to_string(path)?)
}

/// Text form with a `T` header; times use the shortest round-trip representation.
pub fn format_spike_train(train: &SpikeTrain) -> String {
    let mut out = format!("# T={}\n", train.duration());
    for t in train.times() {
        out.push_str(&format!("{t}\n"));
    }
    out
}

pub fn write_spike_train(path: impl AsRef<Path>, train: &SpikeTrain) -> Result<()> {
    fs::write(path, format_spike_train(train))?;
    Ok(())
}

/// Sidecar listing true change points, one per line.
pub fn format_change_points(points: &[f64]) -> String {
    let mut out = String::from("# change points\n");
    for c in points {
        out.push_str(&format!("{c}\n"));
    }
    out
}

pub fn parse_change_points(text: &str) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let c: f64 = line
            .parse()
            .map_err(|_| parse_err(idx + 1, format!("invalid change point `{line}`")))?;
        if !c.is_finite() || out.last().is_some_and(|&p| c <= p) {
            return Err(parse_err(idx + 1, format!("change point {c} out of order")));
        }
        out.push(c);
    }
    Ok(out)
}
