//! Simulation studies. Every experiment writes `<out>/<name>.csv`, one row per
//! setting, with the run configuration in the `#` header. Replicate `r` of a
//! setting always uses seed `derive_seed(seed, r)`.

use std::path::PathBuf;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mft_core::detect::{
    detect, mft_test, ChangePoint, DetectConfig, FieldSettings, PreparedTrain, ScaleMethod,
};
use mft_core::estimate::{estimate_m, s_hat_global, OrderSettings};
use mft_core::limit::ThresholdTable;
use mft_core::rng::derive_seed;
use mft_core::scenarios::{self, Scenario};
use mft_core::simulate::{sim_piecewise, theoretical_rho2, IsiModel, Segment};
use mft_core::WindowSet;

use crate::commands::resolve_table;
use crate::config::{merge_file, RunConfig};
use crate::output::write_csv;
use crate::{CliError, ExperimentArgs, ExperimentName, ThresholdArgs};

pub const SIGNIFICANCE_REPS: usize = 2_000;
pub const SIGNIFICANCE_REPS_FULL: usize = 10_000;
pub const LEVEL_REPS: usize = 1_000;
pub const OTHER_REPS: usize = 500;

impl ExperimentName {
    pub fn file_stem(self) -> &'static str {
        match self {
            ExperimentName::SignificanceLevel => "significance-level",
            ExperimentName::AlternativeHistogram => "alternative-histogram",
            ExperimentName::WindowSize => "window-size",
            ExperimentName::EstimatorBias => "estimator-bias",
        }
    }

    pub fn default_reps(self, full: bool) -> usize {
        match self {
            ExperimentName::SignificanceLevel if full => SIGNIFICANCE_REPS_FULL,
            ExperimentName::SignificanceLevel => SIGNIFICANCE_REPS,
            ExperimentName::AlternativeHistogram | ExperimentName::WindowSize => LEVEL_REPS,
            ExperimentName::EstimatorBias => OTHER_REPS,
        }
    }
}

/// Replicates as a parallel map; results are in replicate order.
fn replicate<T: Send>(
    reps: usize,
    seed: u64,
    f: impl Fn(u64) -> Result<T, CliError> + Sync,
) -> Result<Vec<T>, CliError> {
    (0..reps as u64)
        .into_par_iter()
        .map(|r| f(derive_seed(seed, r)))
        .collect()
}

fn table(s: &Scenario, t: &ThresholdArgs) -> Result<(WindowSet, ThresholdTable), CliError> {
    let ws = WindowSet::new(&s.windows, s.duration(), t.dt)?;
    let table = resolve_table(&ws, t)?;
    Ok((ws, table))
}

pub fn run(args: ExperimentArgs) -> Result<(), CliError> {
    let config_file = args.config.clone();
    let mut args = merge_file(args, config_file.as_deref())?;
    let reps = args.reps.unwrap_or(args.name.default_reps(args.full));
    if reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    args.reps = Some(reps);
    let seed = args.seed.unwrap_or(0);
    args.seed = Some(seed);
    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let path = out_dir.join(format!("{}.csv", args.name.file_stem()));
    let run = RunConfig::new("experiment", &args)?;
    info!("{} with {reps} replicates", args.name.file_stem());
    match args.name {
        ExperimentName::SignificanceLevel => {
            let c = args.c.unwrap_or(0.5);
            write_csv(
                &path,
                &run,
                &significance_level(c, reps, seed, &args.threshold)?,
            )?
        }
        ExperimentName::AlternativeHistogram => {
            let (hist, summary) = alternative_histogram(reps, seed, &args.threshold)?;
            write_csv(&path, &run, &hist)?;
            write_csv(
                &out_dir.join("alternative-histogram-summary.csv"),
                &run,
                &summary,
            )?;
        }
        ExperimentName::WindowSize => {
            write_csv(&path, &run, &window_size(reps, seed, &args.threshold)?)?
        }
        ExperimentName::EstimatorBias => write_csv(&path, &run, &estimator_bias(reps, seed)?)?,
    }
    println!("{}", path.display());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub c: f64,
    pub m: usize,
    pub variant: String,
    pub reps: usize,
    pub rejections: usize,
    pub level: f64,
}

/// Level of MFT(0) and MFT(m_hat) on stationary moving-average trains,
/// `a_k = c^k`, for `m = 1..=7`.
pub fn significance_level(
    c: f64,
    reps: usize,
    seed: u64,
    t: &ThresholdArgs,
) -> Result<Vec<LevelRow>, CliError> {
    let base = scenarios::ma_level(c, 1)?;
    let (ws, table) = table(&base, t)?;
    let mut rows = Vec::new();
    for m in 1..=7 {
        let s = scenarios::ma_level(c, m)?;
        let out = replicate(reps, derive_seed(seed, m as u64), |sd| {
            let train = sim_piecewise(&s.segments, sd)?.train;
            let naive = mft_test(&train, &ws, &table, FieldSettings::new(0))?.reject;
            let m_hat = estimate_m(&train.isis(), &OrderSettings::default())?.m_hat;
            let adapted = mft_test(&train, &ws, &table, FieldSettings::new(m_hat))?.reject;
            Ok((naive, adapted))
        })?;
        for (variant, pick) in [("mft0", 0usize), ("mft_mhat", 1)] {
            let rejections = out
                .iter()
                .filter(|o| if pick == 0 { o.0 } else { o.1 })
                .count();
            rows.push(LevelRow {
                c,
                m,
                variant: variant.into(),
                reps,
                rejections,
                level: rejections as f64 / reps as f64,
            });
        }
    }
    Ok(rows)
}

pub const HISTOGRAM_BIN: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub variant: String,
    pub bin_start: f64,
    pub bin_end: f64,
    pub reps: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSummaryRow {
    pub variant: String,
    pub reps: usize,
    pub change_point: f64,
    /// Replicates with a detection within `h` of this change point.
    pub detected: usize,
    /// Detections farther than `h` from every true change point.
    pub false_positives: usize,
    pub total_detections: usize,
}

/// The three detection variants compared under the local-versus-global profile.
pub fn histogram_variants() -> Vec<(&'static str, DetectConfig)> {
    vec![
        ("mfa0", DetectConfig::fixed(0)),
        (
            "mfa_m_global",
            DetectConfig {
                scale: ScaleMethod::Global,
                ..DetectConfig::fixed(3)
            },
        ),
        ("mfa_m_local", DetectConfig::fixed(3)),
    ]
}

pub fn alternative_histogram(
    reps: usize,
    seed: u64,
    t: &ThresholdArgs,
) -> Result<(Vec<HistogramRow>, Vec<DetectionSummaryRow>), CliError> {
    let s = scenarios::local_vs_global()?;
    let truth = s.change_points();
    let (ws, table) = table(&s, t)?;
    let variants = histogram_variants();
    let detections: Vec<Vec<Vec<ChangePoint>>> = replicate(reps, seed, |sd| {
        let train = sim_piecewise(&s.segments, sd)?.train;
        variants
            .iter()
            .map(|(_, cfg)| Ok(detect(&train, &ws, cfg, &table)?.change_points))
            .collect()
    })?;
    let bins = (s.duration() / HISTOGRAM_BIN).ceil() as usize;
    let mut hist = Vec::new();
    let mut summary = Vec::new();
    for (v, (name, _)) in variants.iter().enumerate() {
        let mut counts = vec![0usize; bins];
        let mut false_positives = 0;
        let mut total = 0;
        let mut detected = vec![0usize; truth.len()];
        for rep in &detections {
            let cps = &rep[v];
            total += cps.len();
            for c in cps {
                counts[((c.time / HISTOGRAM_BIN) as usize).min(bins - 1)] += 1;
                if truth.iter().all(|x| (c.time - x).abs() > c.h) {
                    false_positives += 1;
                }
            }
            for (j, x) in truth.iter().enumerate() {
                if cps.iter().any(|c| (c.time - x).abs() <= c.h) {
                    detected[j] += 1;
                }
            }
        }
        for (b, count) in counts.into_iter().enumerate() {
            hist.push(HistogramRow {
                variant: name.to_string(),
                bin_start: b as f64 * HISTOGRAM_BIN,
                bin_end: ((b + 1) as f64 * HISTOGRAM_BIN).min(s.duration()),
                reps,
                count,
            });
        }
        for (j, x) in truth.iter().enumerate() {
            summary.push(DetectionSummaryRow {
                variant: name.to_string(),
                reps,
                change_point: *x,
                detected: detected[j],
                false_positives,
                total_detections: total,
            });
        }
    }
    Ok((hist, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSizeRow {
    pub process: String,
    pub spikes_smallest_window: usize,
    pub h_min: f64,
    pub duration: f64,
    pub reps: usize,
    pub rejections: usize,
    pub level: f64,
}

pub const WINDOW_SIZE_SPIKES: [usize; 5] = [50, 100, 150, 200, 300];

/// Level of MFT(m_hat) with `H = {h, 2h}` and `T = 10h`, where `h` holds
/// the given expected number of events, for the three example processes.
pub fn window_size(
    reps: usize,
    seed: u64,
    t: &ThresholdArgs,
) -> Result<Vec<WindowSizeRow>, CliError> {
    let processes: Vec<(&str, IsiModel)> = vec![
        ("ma", scenarios::example_ma()?),
        ("jitter", scenarios::example_jitter()),
        ("bursty", scenarios::example_bursty()),
    ];
    let mut rows = Vec::new();
    for (p, (name, model)) in processes.iter().enumerate() {
        let mean = theoretical_rho2(model)?.mean;
        for (k, &spikes) in WINDOW_SIZE_SPIKES.iter().enumerate() {
            let h = (spikes as f64 * mean).round().max(1.0);
            let s = Scenario {
                name: "window-size",
                segments: vec![Segment::new(model.clone(), 10.0 * h)?],
                windows: vec![h, 2.0 * h],
            };
            let (ws, table) = table(&s, t)?;
            let rejects = replicate(reps, derive_seed(seed, (p * 100 + k) as u64), |sd| {
                let train = sim_piecewise(&s.segments, sd)?.train;
                Ok(detect(&train, &ws, &DetectConfig::default(), &table)?
                    .test
                    .reject)
            })?;
            let rejections = rejects.iter().filter(|&&r| r).count();
            rows.push(WindowSizeRow {
                process: name.to_string(),
                spikes_smallest_window: spikes,
                h_min: h,
                duration: s.duration(),
                reps,
                rejections,
                level: rejections as f64 / reps as f64,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub t: f64,
    pub h: f64,
    pub reps: usize,
    pub true_s2: f64,
    pub local_mean: f64,
    pub local_defined: usize,
    pub global_mean: f64,
}

pub const BIAS_WINDOW: f64 = 25.0;
pub const BIAS_STEP: f64 = 1.0;

/// Asymptotic `Var(N(a, b])` summed over the segments the interval overlaps.
pub fn true_count_variance(segments: &[Segment], a: f64, b: f64) -> Result<f64, CliError> {
    let mut start = 0.0;
    let mut total = 0.0;
    for s in segments {
        let end = start + s.length;
        let overlap = (b.min(end) - a.max(start)).max(0.0);
        if overlap > 0.0 {
            total += overlap * theoretical_rho2(&s.model)?.count_variance_rate();
        }
        start = end;
    }
    Ok(total)
}

/// True, local and global `s^2` along the local-versus-global profile (`m = 3`).
pub fn estimator_bias(reps: usize, seed: u64) -> Result<Vec<BiasRow>, CliError> {
    let s = scenarios::local_vs_global()?;
    let h = BIAS_WINDOW;
    let m = 3;
    let grid: Vec<f64> = {
        let n = ((s.duration() - 2.0 * h) / BIAS_STEP).floor() as usize;
        (0..=n).map(|k| h + k as f64 * BIAS_STEP).collect()
    };
    let per_rep: Vec<(Vec<Option<f64>>, Option<f64>)> = replicate(reps, seed, |sd| {
        let train = sim_piecewise(&s.segments, sd)?.train;
        let prepared = PreparedTrain::new(&train, FieldSettings::new(m));
        let local = grid
            .iter()
            .map(|&t| prepared.local_scale(t, h).s_hat.map(|x| x * x))
            .collect();
        Ok((local, s_hat_global(&train, h, m).map(|x| x * x)))
    })?;
    let globals: Vec<f64> = per_rep.iter().filter_map(|r| r.1).collect();
    let global_mean = globals.iter().sum::<f64>() / globals.len().max(1) as f64;
    grid.iter()
        .enumerate()
        .map(|(k, &t)| {
            let defined: Vec<f64> = per_rep.iter().filter_map(|r| r.0[k]).collect();
            Ok(BiasRow {
                t,
                h,
                reps,
                true_s2: true_count_variance(&s.segments, t - h, t + h)?,
                local_mean: defined.iter().sum::<f64>() / defined.len().max(1) as f64,
                local_defined: defined.len(),
                global_mean,
            })
        })
        .collect()
}
