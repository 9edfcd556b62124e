//! The five subcommands. Each computes everything in memory and returns the
//! files to write; [`write_outputs`] commits them only after success.

use std::fs;
use std::path::{Path, PathBuf};

use lppl_core::calendar::weekdays;
use lppl_core::forecast::{a_based_range, nominal_at_latest, CrashForecast, ForecastMethod};
use lppl_core::rolling::{
    detect_stabilization, extrapolate, roll_point, sweep_end_dates, usable_end,
    ExtrapolationResult, RollingCurve, RollingPoint, MIN_EXTRAPOLATION_POINTS,
};
use lppl_core::{
    deflate, fit_hyper_osc, fit_lppl, from_decimal_year, synthesize, Basis, DeflatorSeries,
    ModelParams, PriceSeries, SynthSpec, Window,
};
use rayon::prelude::*;

use crate::config::{ForecastSource, ModelChoice, RunConfig};
use crate::error::{Error, Result};
use crate::formats::{
    parse_deflator_csv, parse_price_csv, parse_rolling_csv, write_curve_csv, write_price_csv,
    write_rolling_csv, RejectedRow,
};
use crate::report::{
    digest, to_json, ExtrapolationReport, FitReport, ForecastReport, StabilityReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Results were produced but some fit hit its iteration limit.
    NotConverged,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NotConverged => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub status: Status,
    /// Printed to standard output.
    pub stdout: String,
    /// Printed to standard error (warnings such as rejected rows).
    pub stderr: String,
}

/// Loaded price data, deflated when a deflator is configured.
pub struct Inputs {
    pub series: PriceSeries,
    pub rejected: Vec<RejectedRow>,
    pub deflator: Option<DeflatorSeries>,
    pub digest: String,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(Error::io(path))
}

fn load_deflator(cfg: &RunConfig) -> Result<Option<(DeflatorSeries, Vec<u8>)>> {
    let Some(path) = &cfg.deflator else {
        return Ok(None);
    };
    let bytes = read(path)?;
    let d = parse_deflator_csv(
        bytes.as_slice(),
        cfg.base_period,
        &path.display().to_string(),
    )?;
    Ok(Some((d, bytes)))
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("no input price file (use --input or `input`)".into()))?;
    let bytes = read(path)?;
    let parsed = parse_price_csv(
        bytes.as_slice(),
        &cfg.columns,
        Basis::Nominal,
        &path.display().to_string(),
    )?;
    let deflator = load_deflator(cfg)?;
    let normalized = write_price_csv(&parsed.series);
    let config = cfg.canonical_json();
    let deflator_bytes = deflator.as_ref().map_or(&[][..], |(_, b)| b.as_slice());
    let digest = digest([
        ("prices", normalized.as_bytes()),
        ("deflator", deflator_bytes),
        ("config", config.as_bytes()),
    ]);
    let (series, deflator) = match deflator {
        Some((d, _)) => (deflate(&parsed.series, &d, d.base_period())?, Some(d)),
        None => (parsed.series, None),
    };
    Ok(Inputs {
        series,
        rejected: parsed.rejected,
        deflator,
        digest,
    })
}

fn rejected_note(rejected: &[RejectedRow]) -> String {
    rejected
        .iter()
        .map(|r| format!("warning: row {} rejected: {}\n", r.row, r.reason))
        .collect()
}

fn window(cfg: &RunConfig, series: &PriceSeries) -> Result<Window> {
    Ok(Window::new(
        cfg.window_start.unwrap_or(series.first_date()),
        cfg.window_end.unwrap_or(series.last_date()),
    )?)
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let window = window(cfg, &inputs.series)?;
    let result = match cfg.model {
        ModelChoice::Lppl => fit_lppl(&inputs.series, &window, &cfg.fit)?,
        ModelChoice::Hyper => fit_hyper_osc(&inputs.series, &window, &cfg.fit)?,
    };
    let curve = write_curve_csv(&result.params, &inputs.series, &result.window)?;
    let status = if result.converged {
        Status::Ok
    } else {
        Status::NotConverged
    };
    let tc = match result.params {
        ModelParams::Lppl(p) => p.tc,
        ModelParams::HyperOsc(p) => p.tc2,
    };
    let stdout = format!(
        "fit {} points {}..{}: tc = {} ({}), sse = {}, converged = {}\n",
        result.n_points,
        result.window.start,
        result.window.end,
        tc,
        from_decimal_year(tc.into())?,
        result.sse,
        result.converged
    );
    let report = FitReport {
        result,
        basis: inputs.series.basis(),
        rejected_rows: inputs.rejected.clone(),
        inputs_digest: inputs.digest,
    };
    Ok(Outcome {
        files: vec![
            ("fit.json".into(), to_json(&report)),
            ("curve.csv".into(), curve),
        ],
        status,
        stdout,
        stderr: rejected_note(&inputs.rejected),
    })
}

/// End dates for the sweep: explicit list, or every `step`-th observation
/// between the first usable end and the last end.
fn end_dates(cfg: &RunConfig, series: &PriceSeries, window: &Window) -> Vec<chrono::NaiveDate> {
    if let Some(ends) = &cfg.rolling.end_dates {
        return ends.clone();
    }
    let last = cfg.rolling.last_end.unwrap_or(window.end);
    let first = cfg.rolling.first_end.unwrap_or_else(|| {
        series
            .dates()
            .find(|&d| usable_end(series, window.start, d))
            .unwrap_or(last)
    });
    sweep_end_dates(series, first, last, cfg.rolling.step)
}

/// Cold-start sweeps fan out across threads; results are reassembled in
/// end-date order so the output does not depend on scheduling.
fn sweep(
    cfg: &RunConfig,
    series: &PriceSeries,
    start: chrono::NaiveDate,
    ends: &[chrono::NaiveDate],
) -> Result<RollingCurve> {
    if cfg.rolling.warm_start {
        return Ok(lppl_core::rolling::roll(
            series,
            start,
            ends,
            &cfg.fit,
            lppl_core::rolling::RollOptions { warm_start: true },
        )?);
    }
    let mut ends = ends.to_vec();
    ends.sort();
    ends.dedup();
    let fitted: Vec<Option<RollingPoint>> = ends
        .par_iter()
        .map(|&end| Ok(roll_point(series, start, end, &cfg.fit, None)?.map(|(p, _)| p)))
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (end, point) in ends.into_iter().zip(fitted) {
        match point {
            Some(p) => points.push(p),
            None => skipped.push(end),
        }
    }
    Ok(RollingCurve::from_points(
        start,
        cfg.fit.clone(),
        points,
        skipped,
    )?)
}

pub fn cmd_roll(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    if cfg.model != ModelChoice::Lppl {
        return Err(Error::Config("roll supports the lppl model only".into()));
    }
    let inputs = load_inputs(cfg)?;
    let window = window(cfg, &inputs.series)?;
    let ends = end_dates(cfg, &inputs.series, &window);
    let curve = sweep(cfg, &inputs.series, window.start, &ends)?;

    let span = cfg.rolling.span.min(curve.points.len());
    let stability = detect_stabilization(&curve, cfg.rolling.threshold_days, span)?;
    let converged_tail = curve
        .points
        .iter()
        .rev()
        .take_while(|p| p.converged)
        .count();
    let (extrapolation, degenerate) = if converged_tail >= MIN_EXTRAPOLATION_POINTS {
        (
            extrapolate(&curve, &cfg.rolling.methods, cfg.rolling.span)?,
            false,
        )
    } else {
        (ExtrapolationResult::last_value_only(&curve)?, true)
    };
    let status = if curve.points.iter().all(|p| p.converged) {
        Status::Ok
    } else {
        Status::NotConverged
    };

    let mut stderr = rejected_note(&inputs.rejected);
    for d in &curve.skipped {
        stderr.push_str(&format!(
            "warning: end date {d} skipped, window too short\n"
        ));
    }
    let stdout = format!(
        "rolled {} end dates: stabilized = {}, tc range {} .. {}{}\n",
        curve.points.len(),
        stability.stabilized,
        extrapolation.low_date,
        extrapolation.high_date,
        if degenerate { " (last value only)" } else { "" }
    );
    let files = vec![
        ("rolling.csv".into(), write_rolling_csv(&curve.points)?),
        (
            "stability.json".into(),
            to_json(&StabilityReport {
                report: stability,
                threshold_days: cfg.rolling.threshold_days,
                span,
                inputs_digest: inputs.digest.clone(),
            }),
        ),
        (
            "extrapolation.json".into(),
            to_json(&ExtrapolationReport {
                result: extrapolation,
                degenerate,
                basis: inputs.series.basis(),
                inputs_digest: inputs.digest,
            }),
        ),
    ];
    Ok(Outcome {
        files,
        status,
        stdout,
        stderr,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read(path)?;
    serde_json::from_slice(&bytes).map_err(Error::json(path.display().to_string()))
}

struct Prior {
    method: ForecastMethod,
    tc_range: (f64, f64),
    basis: Basis,
    /// Model for pricing the crash window, or trailing `A` values.
    pricing: Pricing,
    digest_parts: Vec<(String, Vec<u8>)>,
}

enum Pricing {
    Model(ModelParams),
    ARange(f64, f64),
}

fn prior_from_rolling(cfg: &RunConfig, dir: &Path) -> Result<Prior> {
    let ex_path = dir.join("extrapolation.json");
    let roll_path = dir.join("rolling.csv");
    let ex: ExtrapolationReport = read_json(&ex_path)?;
    let roll_bytes = read(&roll_path)?;
    let points = parse_rolling_csv(roll_bytes.as_slice(), &roll_path.display().to_string())?;
    let span = cfg.forecast.a_span.unwrap_or(cfg.rolling.span);
    let trailing: Vec<f64> = points
        .iter()
        .rev()
        .filter(|p| p.converged)
        .take(span)
        .map(|p| p.a)
        .collect();
    let (lo, hi) = a_based_range(&trailing)?;
    Ok(Prior {
        method: ForecastMethod::Lppl,
        tc_range: (ex.result.low, ex.result.high),
        basis: ex.basis,
        pricing: Pricing::ARange(lo, hi),
        digest_parts: vec![
            ("extrapolation".into(), read(&ex_path)?),
            ("rolling".into(), roll_bytes),
        ],
    })
}

fn prior_from_fit(dir: &Path) -> Result<Prior> {
    let path = dir.join("fit.json");
    let report: FitReport = read_json(&path)?;
    let (method, tc) = match report.result.params {
        ModelParams::Lppl(p) => (ForecastMethod::Lppl, p.tc),
        ModelParams::HyperOsc(p) => (ForecastMethod::HyperOsc, p.tc2),
    };
    Ok(Prior {
        method,
        tc_range: (tc, tc),
        basis: report.basis,
        pricing: Pricing::Model(report.result.params),
        digest_parts: vec![("fit".into(), read(&path)?)],
    })
}

pub fn cmd_forecast(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let dir = &cfg.out;
    let has_rolling = dir.join("extrapolation.json").is_file() && dir.join("rolling.csv").is_file();
    let has_fit = dir.join("fit.json").is_file();
    let prior = match cfg.forecast.source {
        ForecastSource::Rolling | ForecastSource::Auto if has_rolling => {
            prior_from_rolling(cfg, dir)?
        }
        ForecastSource::Fit | ForecastSource::Auto if has_fit => prior_from_fit(dir)?,
        _ => return Err(Error::NoPriorResults(dir.clone())),
    };
    let deflator = load_deflator(cfg)?;

    let lead = cfg.forecast.lead_months;
    let forecast = CrashForecast::new(prior.method, prior.tc_range, lead)?;
    let (lo, hi) = match prior.pricing {
        Pricing::Model(model) => forecast.model_price_range(&model)?,
        Pricing::ARange(lo, hi) => (lo, hi),
    };
    let (real, nominal) = match (prior.basis, &deflator) {
        (Basis::Nominal, _) => (None, Some((lo, hi))),
        (Basis::Real { .. }, None) => (Some((lo, hi)), None),
        (Basis::Real { base }, Some((d, _))) => {
            let d = d.with_base(base)?;
            let (n_lo, _) = nominal_at_latest(lo, &d, forecast.crash_window.0)?;
            let (n_hi, _) = nominal_at_latest(hi, &d, forecast.crash_window.1)?;
            (Some((lo, hi)), Some((n_lo.min(n_hi), n_lo.max(n_hi))))
        }
    };

    let config = cfg.canonical_json();
    let mut parts: Vec<(&str, &[u8])> = prior
        .digest_parts
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_slice()))
        .collect();
    parts.push((
        "deflator",
        deflator.as_ref().map_or(&[][..], |(_, b)| b.as_slice()),
    ));
    parts.push(("config", config.as_bytes()));

    let report = ForecastReport {
        method: prior.method,
        tc_low: prior.tc_range.0,
        tc_high: prior.tc_range.1,
        tc_low_date: from_decimal_year(prior.tc_range.0.into())?,
        tc_high_date: from_decimal_year(prior.tc_range.1.into())?,
        crash_window_start: forecast.crash_window.0,
        crash_window_end: forecast.crash_window.1,
        lead_months: lead,
        real_price_low: real.map(|r| r.0),
        real_price_high: real.map(|r| r.1),
        nominal_price_low: nominal.map(|r| r.0),
        nominal_price_high: nominal.map(|r| r.1),
        inputs_digest: digest(parts),
    };
    let summary = report.summary();
    Ok(Outcome {
        files: vec![
            ("forecast.json".into(), to_json(&report)),
            ("summary.txt".into(), summary.clone()),
        ],
        status: Status::Ok,
        stdout: summary,
        stderr: String::new(),
    })
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg
        .synth
        .as_ref()
        .ok_or_else(|| Error::Config("synth needs a `synth` section in the config".into()))?;
    let dates = match (&spec.dates, spec.start, spec.count) {
        (Some(d), None, None) => d.clone(),
        (None, Some(start), Some(count)) => weekdays(start, count),
        _ => {
            return Err(Error::Config(
                "synth needs either `dates` or both `start` and `count`".into(),
            ))
        }
    };
    let series = synthesize(&SynthSpec {
        model: spec.model,
        dates,
        noise_sigma: spec.noise_sigma,
        seed: cfg.seed,
    })?;
    Ok(Outcome {
        stdout: format!(
            "synthesized {} prices {}..{} (seed {})\n",
            series.len(),
            series.first_date(),
            series.last_date(),
            cfg.seed
        ),
        files: vec![("prices.csv".into(), write_price_csv(&series))],
        status: Status::Ok,
        stderr: String::new(),
    })
}

/// Validate the input and echo it as normalized CSV (deflated when a
/// deflator is configured).
pub fn cmd_ingest(cfg: &RunConfig) -> Result<Outcome> {
    let inputs = load_inputs(cfg)?;
    Ok(Outcome {
        files: Vec::new(),
        status: Status::Ok,
        stdout: write_price_csv(&inputs.series),
        stderr: rejected_note(&inputs.rejected),
    })
}

/// Write every file into `dir`. Each is staged under a temporary name and
/// renamed once all writes succeeded; on failure the staged files are removed.
pub fn write_outputs(dir: &Path, files: &[(String, String)]) -> Result<()> {
    if files.is_empty() {
        return Ok(());
    }
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let staged: Vec<(PathBuf, PathBuf)> = files
        .iter()
        .map(|(name, _)| (dir.join(format!(".{name}.partial")), dir.join(name)))
        .collect();
    let cleanup = |upto: usize| {
        for (tmp, _) in &staged[..upto] {
            let _ = fs::remove_file(tmp);
        }
    };
    for (i, ((tmp, _), (_, body))) in staged.iter().zip(files).enumerate() {
        if let Err(e) = fs::write(tmp, body) {
            cleanup(i + 1);
            return Err(Error::io(tmp)(e));
        }
    }
    for (tmp, dest) in &staged {
        fs::rename(tmp, dest).map_err(Error::io(dest))?;
    }
    Ok(())
}
