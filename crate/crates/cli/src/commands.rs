//! `simulate`, `estimate-m`, `calibrate` and `detect`.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;

use mft_core::detect::{
    detect as run_detect, DetectConfig, DetectionReport, MPolicy, PointState, ScaleMethod,
    ThresholdChoice,
};
use mft_core::estimate::{estimate_m as run_estimate_m, OrderSettings};
use mft_core::io::{format_change_points, format_spike_train, read_spike_train};
use mft_core::limit::{
    decode_table, encode_table, threshold_q, BootstrapSettings, ThresholdCache, ThresholdMeta,
    ThresholdTable, DEFAULT_N_SIMS,
};
use mft_core::model_spec::parse_model_spec;
use mft_core::simulate::sim_piecewise;
use mft_core::WindowSet;

use crate::config::{merge_file, RunConfig};
use crate::output::{json_string, write_csv, write_text};
use crate::{
    CalibrateArgs, CliError, DetectArgs, EstimateMArgs, OrderArgs, ScaleArg, SimulateArgs,
    ThresholdArgs, ThresholdKind,
};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SIM_SEED: u64 = 0;

fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Sidecar path for true change points: `<out>.cp`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".cp");
    PathBuf::from(s)
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let config_file = args.config.clone();
    let args = merge_file(args, config_file.as_deref())?;
    let model_path = required(args.model.clone(), "model")?;
    let out = required(args.out.clone(), "out")?;
    if let Some(d) = args.duration {
        if !(d.is_finite() && d > 0.0) {
            return Err(usage(format!("--T must be positive, got {d}")));
        }
    }
    let text = fs::read_to_string(&model_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", model_path.display())))?;
    let spec = parse_model_spec(&text)?;
    let segments = spec.segments(args.duration)?;
    let seed = args.seed.unwrap_or(0);
    let sim = sim_piecewise(&segments, seed)?;
    write_text(&out, &format_spike_train(&sim.train))?;
    write_text(
        &sidecar_path(&out),
        &format_change_points(&sim.change_points),
    )?;
    info!(
        "wrote {} events on [0, {}] to {}",
        sim.train.len(),
        sim.train.duration(),
        out.display()
    );
    Ok(())
}

pub(crate) fn order_settings(a: &OrderArgs) -> Result<OrderSettings, CliError> {
    let d = OrderSettings::default();
    let s = OrderSettings {
        section_len: a.section_len.unwrap_or(d.section_len),
        max_lag: a.max_lag.unwrap_or(d.max_lag),
        alpha: a.alpha_m.unwrap_or(d.alpha),
    };
    if !(s.alpha > 0.0 && s.alpha < 1.0) {
        return Err(usage(format!(
            "--alpha-m must lie in (0, 1), got {}",
            s.alpha
        )));
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
struct LagRow {
    lag: usize,
    sections: usize,
    median_correlation: f64,
    p_value: f64,
    significant: bool,
    m_hat: usize,
}

pub fn estimate_m(args: EstimateMArgs) -> Result<(), CliError> {
    let config_file = args.config.clone();
    let args = merge_file(args, config_file.as_deref())?;
    let input = required(args.input.clone(), "input")?;
    let settings = order_settings(&args.order)?;
    let train = read_spike_train(&input)?;
    let est = run_estimate_m(&train.isis(), &settings)?;
    println!("{}", est.m_hat);
    if let Some(out) = &args.out {
        let rows: Vec<LagRow> = est
            .per_lag
            .iter()
            .map(|l| LagRow {
                lag: l.lag,
                sections: l.correlations.len(),
                median_correlation: l.median,
                p_value: l.p_value,
                significant: l.p_value < settings.alpha,
                m_hat: est.m_hat,
            })
            .collect();
        write_csv(out, &RunConfig::new("estimate-m", &args)?, &rows)?;
    }
    Ok(())
}

fn window_set(windows: &[f64], duration: f64, dt: Option<f64>) -> Result<WindowSet, CliError> {
    if windows.is_empty() {
        return Err(usage("--windows is required"));
    }
    Ok(WindowSet::new(windows, duration, dt)?)
}

fn cache_for(a: &ThresholdArgs) -> Option<ThresholdCache> {
    a.cache_dir
        .as_ref()
        .map(ThresholdCache::new)
        .or_else(ThresholdCache::from_env)
}

pub(crate) fn threshold_settings(a: &ThresholdArgs) -> Result<(f64, usize, u64), CliError> {
    let alpha = a.alpha.unwrap_or(DEFAULT_ALPHA);
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(usage(format!("--alpha must lie in (0, 1), got {alpha}")));
    }
    let sims = a.sims.unwrap_or(DEFAULT_N_SIMS);
    if sims < 2 {
        return Err(usage("--sims must be at least 2"));
    }
    Ok((alpha, sims, a.sim_seed.unwrap_or(DEFAULT_SIM_SEED)))
}

/// Threshold table from the cache when one is configured, else calibrated in memory.
pub(crate) fn resolve_table(ws: &WindowSet, a: &ThresholdArgs) -> Result<ThresholdTable, CliError> {
    let (alpha, sims, seed) = threshold_settings(a)?;
    Ok(match cache_for(a) {
        Some(cache) => cache.get_or_calibrate(ws, alpha, sims, seed)?,
        None => threshold_q(ws, alpha, sims, seed)?,
    })
}

pub fn calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let config_file = args.config.clone();
    let mut args = merge_file(args, config_file.as_deref())?;
    if let Some(seed) = args.seed.take() {
        args.threshold.sim_seed = Some(seed);
    }
    let duration = required(args.duration, "T")?;
    let ws = window_set(&args.windows, duration, args.threshold.dt)?;
    let (alpha, sims, seed) = threshold_settings(&args.threshold)?;
    let table = threshold_q(&ws, alpha, sims, seed)?;
    match (&args.out, cache_for(&args.threshold)) {
        (Some(out), _) => {
            let bytes = encode_table(&table)?;
            write_text(out, std::str::from_utf8(&bytes).expect("json is utf-8"))?;
            println!("{}", out.display());
        }
        (None, Some(cache)) => println!("{}", cache.store(&table)?.display()),
        (None, None) => {
            return Err(usage("give --out, --cache-dir or set MFT_CACHE_DIR"));
        }
    }
    info!("Q = {}", table.q);
    Ok(())
}

#[derive(Debug, Serialize)]
struct DetectOutput<'a> {
    run: RunConfig,
    input: String,
    duration: f64,
    events: usize,
    windows: Vec<f64>,
    grid_step: f64,
    detect_config: &'a DetectConfig,
    threshold_table: &'a ThresholdMeta,
    #[serde(flatten)]
    report: &'a DetectionReport,
}

#[derive(Debug, Serialize, serde::Deserialize)]
pub struct FieldRow {
    pub h: f64,
    pub t: f64,
    pub diff: i64,
    pub s_hat: Option<f64>,
    pub g: f64,
    pub r: f64,
    pub mask: String,
}

fn mask_name(s: PointState) -> &'static str {
    match s {
        PointState::Valid => "valid",
        PointState::Zeroed => "zeroed",
        PointState::Masked => "masked",
    }
}

pub(crate) fn detect_config(args: &DetectArgs) -> Result<DetectConfig, CliError> {
    let m = match args.m.as_deref().unwrap_or("auto") {
        "auto" => MPolicy::Auto(order_settings(&args.order)?),
        k => MPolicy::Fixed(k.parse().map_err(|_| {
            usage(format!(
                "--m must be `auto` or a nonnegative integer, got `{k}`"
            ))
        })?),
    };
    let threshold = match args.threshold_kind.unwrap_or(ThresholdKind::Asymptotic) {
        ThresholdKind::Asymptotic => ThresholdChoice::Asymptotic,
        ThresholdKind::Bootstrap => {
            let d = BootstrapSettings::default();
            ThresholdChoice::Bootstrap(BootstrapSettings {
                n_boot: args.n_boot.unwrap_or(d.n_boot),
                block_len: args.block_len.or(d.block_len),
                seed: args.boot_seed.unwrap_or(d.seed),
            })
        }
    };
    Ok(DetectConfig {
        m,
        scale: match args.scale.unwrap_or(ScaleArg::Local) {
            ScaleArg::Local => ScaleMethod::Local,
            ScaleArg::Global => ScaleMethod::Global,
        },
        mask_undefined: !args.no_mask,
        min_side_isis: args.min_side,
        threshold,
    })
}

pub fn detect(args: DetectArgs) -> Result<(), CliError> {
    let config_file = args.config.clone();
    let args = merge_file(args, config_file.as_deref())?;
    let input = required(args.input.clone(), "input")?;
    let config = detect_config(&args)?;
    let train = read_spike_train(&input)?;
    let ws = window_set(&args.windows, train.duration(), args.threshold.dt)?;
    let table = match &args.table {
        Some(path) => {
            let bytes =
                fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let table = decode_table(&bytes)?;
            table.check_matches(&ws)?;
            table
        }
        None => resolve_table(&ws, &args.threshold)?,
    };
    let report = run_detect(&train, &ws, &config, &table)?;
    let run = RunConfig::new("detect", &args)?;

    if let Some(path) = &args.field_csv {
        let rows: Vec<FieldRow> = report
            .test
            .fields
            .iter()
            .flat_map(|f| {
                (0..f.len()).map(move |k| FieldRow {
                    h: f.h,
                    t: f.grid[k],
                    diff: f.diff[k],
                    s_hat: f.s_hat[k],
                    g: f.g[k],
                    r: f.r[k],
                    mask: mask_name(f.mask[k]).to_string(),
                })
            })
            .collect();
        write_csv(path, &run, &rows)?;
    }
    let doc = DetectOutput {
        run,
        input: input.display().to_string(),
        duration: train.duration(),
        events: train.len(),
        windows: ws.windows().to_vec(),
        grid_step: ws.grid_step(),
        detect_config: &config,
        threshold_table: &table.meta,
        report: &report,
    };
    let text = json_string(&doc)?;
    match &args.out {
        Some(out) => write_text(out, &text)?,
        None => print!("{text}"),
    }
    for w in &report.diagnostics.warnings {
        log::warn!("{w}");
    }
    if !report.test.decidable() {
        return Err(CliError::Undecidable(
            "every grid point is masked or zeroed; the report was written".into(),
        ));
    }
    Ok(())
}
