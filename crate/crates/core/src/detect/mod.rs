//! The multiple filter test and the multiple filter algorithm.
//!
//! [`mft_test`] evaluates `M = max_{h,t} R_{h,t}` over valid grid points and
//! compares it with the threshold `Q`. [`detect`] runs the full pipeline:
//! dependence order, fields, test decision, change points and rate profile.

mod field;
mod mfa;

pub use field::{g_field, FieldSettings, PointState, PreparedTrain, ScaleMethod, ScaledField};
pub use mfa::{mfa_candidates, mfa_combine, ChangePoint};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MftError, Result};
use crate::estimate::{estimate_m, MOrderEstimate, OrderSettings};
use crate::grid::WindowSet;
use crate::limit::{bootstrap_q, BootstrapSettings, ThresholdTable};
use crate::train::SpikeTrain;

/// Expected events in the smallest window below which the asymptotic level is unreliable.
pub const MIN_EXPECTED_SPIKES: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdSource {
    Asymptotic,
    Bootstrap { block_len: usize, n_boot: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `None` when every grid point of every window is masked or zeroed.
    pub statistic: Option<f64>,
    pub threshold: f64,
    pub reject: bool,
    pub threshold_source: ThresholdSource,
    #[serde(skip)]
    pub fields: Vec<ScaledField>,
}

impl TestResult {
    pub fn decidable(&self) -> bool {
        self.statistic.is_some()
    }
}

/// Fields for every window of `ws`, rescaled with `table`.
pub fn compute_fields(
    train: &SpikeTrain,
    ws: &WindowSet,
    table: &ThresholdTable,
    settings: FieldSettings,
) -> Result<Vec<ScaledField>> {
    if (train.duration() - ws.duration()).abs() > 1e-9 * ws.duration().max(1.0) {
        return Err(MftError::invalid(format!(
            "window set is for T = {}, train has T = {}",
            ws.duration(),
            train.duration()
        )));
    }
    table.check_matches(ws)?;
    let prepared = PreparedTrain::new(train, settings);
    ws.windows()
        .par_iter()
        .map(|&h| {
            let row = table.row(h).ok_or_else(|| {
                MftError::ThresholdMismatch(format!("no threshold row for h = {h}"))
            })?;
            prepared.field(h, &ws.grid(h), row)
        })
        .collect()
}

/// `M` over valid points of all fields.
pub fn statistic(fields: &[ScaledField]) -> Option<f64> {
    fields
        .iter()
        .filter_map(ScaledField::max_valid_r)
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.max(r)))
        })
}

/// The test with the asymptotic threshold of `table`.
pub fn mft_test(
    train: &SpikeTrain,
    ws: &WindowSet,
    table: &ThresholdTable,
    settings: FieldSettings,
) -> Result<TestResult> {
    let fields = compute_fields(train, ws, table, settings)?;
    let statistic = statistic(&fields);
    Ok(TestResult {
        reject: statistic.is_some_and(|m| m > table.q),
        statistic,
        threshold: table.q,
        threshold_source: ThresholdSource::Asymptotic,
        fields,
    })
}

/// Candidates of every field, combined across windows.
pub fn mfa(fields: &[ScaledField], q: f64) -> Vec<ChangePoint> {
    let candidates: Vec<ChangePoint> = fields.iter().flat_map(|f| mfa_candidates(f, q)).collect();
    mfa_combine(&candidates)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSegment {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    /// Events per second.
    pub rate: f64,
}

/// Piecewise-constant rate between consecutive change points.
pub fn rate_profile(train: &SpikeTrain, change_points: &[f64]) -> Result<Vec<RateSegment>> {
    let mut bounds = Vec::with_capacity(change_points.len() + 2);
    bounds.push(0.0);
    for &c in change_points {
        if !(c > 0.0 && c < train.duration()) {
            return Err(MftError::domain(format!(
                "change point {c} outside (0, {})",
                train.duration()
            )));
        }
        bounds.push(c);
    }
    bounds.push(train.duration());
    bounds
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if !(b > a) {
                return Err(MftError::domain(format!(
                    "zero-length or unsorted segment ({a}, {b}]"
                )));
            }
            let count = train.count_events(a, b)?;
            Ok(RateSegment {
                start: a,
                end: b,
                count,
                rate: count as f64 / (b - a),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", content = "value", rename_all = "snake_case")]
pub enum MPolicy {
    Auto(OrderSettings),
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ThresholdChoice {
    Asymptotic,
    Bootstrap(BootstrapSettings),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectConfig {
    pub m: MPolicy,
    pub scale: ScaleMethod,
    pub mask_undefined: bool,
    pub min_side_isis: Option<usize>,
    pub threshold: ThresholdChoice,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            m: MPolicy::Auto(OrderSettings::default()),
            scale: ScaleMethod::Local,
            mask_undefined: true,
            min_side_isis: None,
            threshold: ThresholdChoice::Asymptotic,
        }
    }
}

impl DetectConfig {
    pub fn fixed(m: usize) -> Self {
        DetectConfig {
            m: MPolicy::Fixed(m),
            ..Default::default()
        }
    }

    pub fn field_settings(&self, m: usize) -> FieldSettings {
        FieldSettings {
            m,
            scale: self.scale,
            mask_undefined: self.mask_undefined,
            min_side_isis: self.min_side_isis,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDiagnostics {
    pub h: f64,
    pub masked_fraction: f64,
    pub zeroed_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    pub windows: Vec<WindowDiagnostics>,
    pub expected_spikes_smallest_window: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub test: TestResult,
    pub change_points: Vec<ChangePoint>,
    pub rate_profile: Vec<RateSegment>,
    pub m_used: usize,
    pub m_estimate: Option<MOrderEstimate>,
    pub diagnostics: Diagnostics,
}

impl DetectionReport {
    pub fn change_point_times(&self) -> Vec<f64> {
        self.change_points.iter().map(|c| c.time).collect()
    }
}

/// Full pipeline: order, fields, test, and (on rejection) change points.
pub fn detect(
    train: &SpikeTrain,
    ws: &WindowSet,
    config: &DetectConfig,
    table: &ThresholdTable,
) -> Result<DetectionReport> {
    let (m_used, m_estimate) = match &config.m {
        MPolicy::Fixed(m) => (*m, None),
        MPolicy::Auto(settings) => {
            let est = estimate_m(&train.isis(), settings)?;
            (est.m_hat, Some(est))
        }
    };
    let settings = config.field_settings(m_used);

    let mut diagnostics = Diagnostics {
        expected_spikes_smallest_window: train.len() as f64 / train.duration() * ws.min_window(),
        ..Default::default()
    };
    if diagnostics.expected_spikes_smallest_window < MIN_EXPECTED_SPIKES {
        let msg = format!(
            "smallest window holds about {:.0} events; at least {MIN_EXPECTED_SPIKES:.0} are \
             needed for the asymptotic level",
            diagnostics.expected_spikes_smallest_window
        );
        warn!("{msg}");
        diagnostics.warnings.push(msg);
    }

    let mut test = mft_test(train, ws, table, settings)?;
    if let ThresholdChoice::Bootstrap(boot) = &config.threshold {
        let b = bootstrap_q(train, ws, table, settings, boot)?;
        test.threshold = b.q;
        test.threshold_source = ThresholdSource::Bootstrap {
            block_len: b.block_len,
            n_boot: boot.n_boot,
        };
        test.reject = test.statistic.is_some_and(|m| m > b.q);
    }
    if !test.decidable() {
        diagnostics
            .warnings
            .push("every grid point is masked or zeroed; the test is undecidable".into());
    }
    diagnostics.windows = test
        .fields
        .iter()
        .map(|f| WindowDiagnostics {
            h: f.h,
            masked_fraction: f.fraction(PointState::Masked),
            zeroed_fraction: f.fraction(PointState::Zeroed),
        })
        .collect();

    let change_points = if test.reject {
        mfa(&test.fields, test.threshold)
    } else {
        Vec::new()
    };
    let times: Vec<f64> = change_points.iter().map(|c| c.time).collect();
    let rate_profile = rate_profile(train, &times)?;
    Ok(DetectionReport {
        test,
        change_points,
        rate_profile,
        m_used,
        m_estimate,
        diagnostics,
    })
}
