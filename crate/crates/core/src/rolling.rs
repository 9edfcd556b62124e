//! Fixed-start, moving-end refits and the behaviour of the resulting
//! critical-time curve.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::calendar::{from_decimal_year, to_decimal_year, DAYS_PER_YEAR, MEAN_MONTH_DAYS};
use crate::error::{Error, Result};
use crate::fit::{fit_lppl_from, FitConfig, FitResult, MIN_WINDOW};
use crate::linalg::lstsq;
use crate::model::ModelParams;
use crate::series::{PriceSeries, Window};

/// Minimum converged points [`extrapolate`] works with.
pub const MIN_EXTRAPOLATION_POINTS: usize = 8;
pub const DEFAULT_SPAN: usize = 8;
pub const DEFAULT_THRESHOLD_DAYS: f64 = 14.0;
/// Default sweep step in observations (trading days).
pub const DEFAULT_STEP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollingPoint {
    pub end_date: NaiveDate,
    /// Critical time, decimal year.
    pub tc: f64,
    pub a: f64,
    pub sse: f64,
    pub converged: bool,
}

impl RollingPoint {
    pub fn from_fit(end_date: NaiveDate, fit: &FitResult) -> Self {
        let (tc, a) = match fit.params {
            ModelParams::Lppl(p) => (p.tc, p.a),
            ModelParams::HyperOsc(p) => (p.tc2, p.a),
        };
        Self {
            end_date,
            tc,
            a,
            sse: fit.sse,
            converged: fit.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingCurve {
    pub points: Vec<RollingPoint>,
    pub window_start: NaiveDate,
    pub config: FitConfig,
    /// Requested end dates that left fewer than the minimum window.
    #[serde(default)]
    pub skipped: Vec<NaiveDate>,
}

impl RollingCurve {
    /// Assemble a curve from independently computed points, ordering them by
    /// end date.
    pub fn from_points(
        window_start: NaiveDate,
        config: FitConfig,
        mut points: Vec<RollingPoint>,
        skipped: Vec<NaiveDate>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::NoValidEndDates);
        }
        points.sort_by_key(|p| p.end_date);
        if let Some(w) = points.windows(2).find(|w| w[0].end_date == w[1].end_date) {
            return Err(Error::DuplicateDates(alloc::vec![w[0].end_date]));
        }
        Ok(Self {
            points,
            window_start,
            config,
            skipped,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RollOptions {
    /// Seed each fit with the previous end date's optimum as an extra
    /// refinement start. The grid still runs.
    pub warm_start: bool,
}

/// Whether `[window_start, end]` holds enough observations to fit.
pub fn usable_end(series: &PriceSeries, window_start: NaiveDate, end: NaiveDate) -> bool {
    end >= window_start
        && series
            .dates()
            .filter(|&d| window_start <= d && d <= end)
            .take(MIN_WINDOW)
            .count()
            == MIN_WINDOW
}

/// Fit a single sweep point, `None` when the window is too short.
pub fn roll_point(
    series: &PriceSeries,
    window_start: NaiveDate,
    end: NaiveDate,
    config: &FitConfig,
    warm_start: Option<[f64; 3]>,
) -> Result<Option<(RollingPoint, FitResult)>> {
    if !usable_end(series, window_start, end) {
        return Ok(None);
    }
    let window = Window::new(window_start, end)?;
    let fit = fit_lppl_from(series, &window, config, warm_start)?;
    Ok(Some((RollingPoint::from_fit(end, &fit), fit)))
}

/// One LPPL fit per end date over `[window_start, end]`.
pub fn roll(
    series: &PriceSeries,
    window_start: NaiveDate,
    end_dates: &[NaiveDate],
    config: &FitConfig,
    options: RollOptions,
) -> Result<RollingCurve> {
    config.validate()?;
    let mut ends = end_dates.to_vec();
    ends.sort();
    ends.dedup();
    let mut points = Vec::with_capacity(ends.len());
    let mut skipped = Vec::new();
    let mut previous: Option<[f64; 3]> = None;
    for end in ends {
        let warm = if options.warm_start { previous } else { None };
        match roll_point(series, window_start, end, config, warm)? {
            Some((point, fit)) => {
                if let ModelParams::Lppl(p) = fit.params {
                    previous = Some([p.tc, p.alpha, p.omega]);
                }
                points.push(point);
            }
            None => skipped.push(end),
        }
    }
    RollingCurve::from_points(window_start, config.clone(), points, skipped)
}

/// Every `step`-th observation date in `[first_end, last_end]`, always
/// including the last one in range.
pub fn sweep_end_dates(
    series: &PriceSeries,
    first_end: NaiveDate,
    last_end: NaiveDate,
    step: usize,
) -> Vec<NaiveDate> {
    let in_range: Vec<NaiveDate> = series
        .dates()
        .filter(|&d| first_end <= d && d <= last_end)
        .collect();
    let step = step.max(1);
    let mut out: Vec<NaiveDate> = in_range.iter().copied().step_by(step).collect();
    if let Some(&last) = in_range.last() {
        if out.last() != Some(&last) {
            out.push(last);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationReport {
    pub stabilized: bool,
    /// Earliest end date from which the critical time stays within the
    /// threshold through the end of the curve.
    pub onset: Option<NaiveDate>,
    /// Peak-to-peak critical time over the trailing span, in days.
    pub trailing_dispersion: f64,
    /// Peak-to-peak `A` over the trailing span, in price units.
    pub a_dispersion: f64,
    /// Months between the onset end date and the trailing mean critical time.
    pub lead_estimate: Option<f64>,
}

fn peak_to_peak(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    hi - lo
}

pub fn detect_stabilization(
    curve: &RollingCurve,
    threshold_days: f64,
    span: usize,
) -> Result<StabilizationReport> {
    let n = curve.points.len();
    let span = span.max(1);
    if n < span {
        return Err(Error::TooFewPoints { got: n, need: span });
    }
    let trailing = &curve.points[n - span..];
    let trailing_dispersion = peak_to_peak(trailing.iter().map(|p| p.tc)) * DAYS_PER_YEAR;
    let a_dispersion = peak_to_peak(trailing.iter().map(|p| p.a));
    let stabilized = trailing_dispersion <= threshold_days;

    let (onset, lead_estimate) = if stabilized {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut onset = n - 1;
        for i in (0..n).rev() {
            let tc = curve.points[i].tc;
            let (l, h) = (lo.min(tc), hi.max(tc));
            if (h - l) * DAYS_PER_YEAR > threshold_days {
                break;
            }
            lo = l;
            hi = h;
            onset = i;
        }
        let mean_tc = trailing.iter().map(|p| p.tc).sum::<f64>() / span as f64;
        let onset_date = curve.points[onset].end_date;
        let lead =
            (mean_tc - to_decimal_year(onset_date).value()) * DAYS_PER_YEAR / MEAN_MONTH_DAYS;
        (Some(onset_date), Some(lead))
    } else {
        (None, None)
    };
    Ok(StabilizationReport {
        stabilized,
        onset,
        trailing_dispersion,
        a_dispersion,
        lead_estimate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationMethod {
    /// Carry the last critical time forward.
    LastValue,
    /// Least-squares fit of `tc(end) = t_inf - a exp(-b end)`.
    ExponentialApproach,
    /// Linear trend of the last `span` points, projected to where it meets
    /// `tc(end) = end` when the slope is below one.
    LinearFixedPoint,
}

impl ExtrapolationMethod {
    pub const ALL: [ExtrapolationMethod; 3] = [
        ExtrapolationMethod::LastValue,
        ExtrapolationMethod::ExponentialApproach,
        ExtrapolationMethod::LinearFixedPoint,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEstimate {
    pub method: ExtrapolationMethod,
    /// Finite critical time, decimal year.
    pub tc: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationResult {
    pub estimates: Vec<MethodEstimate>,
    pub low: f64,
    pub high: f64,
    pub low_date: NaiveDate,
    pub high_date: NaiveDate,
}

impl ExtrapolationResult {
    fn from_estimates(estimates: Vec<MethodEstimate>) -> Result<Self> {
        let values: Vec<f64> = estimates.iter().filter_map(|e| e.tc).collect();
        if values.is_empty() {
            return Err(Error::TooFewPoints { got: 0, need: 1 });
        }
        let low = values.iter().copied().fold(f64::INFINITY, f64::min);
        let high = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            estimates,
            low,
            high,
            low_date: from_decimal_year(low.into())?,
            high_date: from_decimal_year(high.into())?,
        })
    }

    /// Degenerate range at the last point of the curve, for sweeps too short
    /// to extrapolate.
    pub fn last_value_only(curve: &RollingCurve) -> Result<Self> {
        let last = curve.points.last().ok_or(Error::NoValidEndDates)?;
        Self::from_estimates(alloc::vec![MethodEstimate {
            method: ExtrapolationMethod::LastValue,
            tc: Some(last.tc),
            error: None,
        }])
    }
}

/// Extrapolate the trailing converged segment of `curve` to a finite
/// critical time. Methods that fail are reported individually.
pub fn extrapolate(
    curve: &RollingCurve,
    methods: &[ExtrapolationMethod],
    span: usize,
) -> Result<ExtrapolationResult> {
    let start = curve
        .points
        .iter()
        .rposition(|p| !p.converged)
        .map_or(0, |i| i + 1);
    let segment = &curve.points[start..];
    if segment.len() < MIN_EXTRAPOLATION_POINTS {
        return Err(Error::TooFewPoints {
            got: segment.len(),
            need: MIN_EXTRAPOLATION_POINTS,
        });
    }
    let x: Vec<f64> = segment
        .iter()
        .map(|p| to_decimal_year(p.end_date).value())
        .collect();
    let y: Vec<f64> = segment.iter().map(|p| p.tc).collect();

    let estimates = methods
        .iter()
        .map(|&method| {
            let outcome = match method {
                ExtrapolationMethod::LastValue => Ok(y[y.len() - 1]),
                ExtrapolationMethod::ExponentialApproach => exponential_approach(&x, &y),
                ExtrapolationMethod::LinearFixedPoint => linear_fixed_point(&x, &y, span),
            };
            match outcome {
                Ok(tc) => MethodEstimate {
                    method,
                    tc: Some(tc),
                    error: None,
                },
                Err(e) => MethodEstimate {
                    method,
                    tc: None,
                    error: Some(e),
                },
            }
        })
        .collect();
    ExtrapolationResult::from_estimates(estimates)
}

const RATE_BOUNDS: (f64, f64) = (0.05, 500.0);
const RATE_NODES: usize = 240;

/// `t_inf` of `y = t_inf - a exp(-b (x - x0))`, profiling the linear pair
/// `(t_inf, a)` over a log-spaced grid in `b` with golden-section polish.
pub fn exponential_approach(x: &[f64], y: &[f64]) -> core::result::Result<f64, String> {
    if peak_to_peak(y.iter().copied()) == 0.0 {
        return Ok(y[0]);
    }
    let x0 = x[0];
    let ones: Vec<f64> = x.iter().map(|_| 1.0).collect();
    let fit = |ln_b: f64| {
        let b = ln_b.exp();
        let decay: Vec<f64> = x.iter().map(|v| -(-b * (v - x0)).exp()).collect();
        lstsq(&[&ones, &decay], y)
    };
    let (lo, hi) = (RATE_BOUNDS.0.ln(), RATE_BOUNDS.1.ln());
    let grid: Vec<f64> = (0..RATE_NODES)
        .map(|i| lo + (hi - lo) * i as f64 / (RATE_NODES - 1) as f64)
        .collect();
    let sse: Vec<f64> = grid
        .iter()
        .map(|&g| fit(g).map_or(f64::INFINITY, |s| s.sse))
        .collect();
    let best = (0..RATE_NODES)
        .min_by(|&a, &b| sse[a].partial_cmp(&sse[b]).unwrap().then(a.cmp(&b)))
        .filter(|&i| sse[i].is_finite())
        .ok_or_else(|| String::from("exponential approach is singular at every rate"))?;
    if best == 0 {
        return Err(format!(
            "no finite approach: best rate at the lower bound {} per year",
            RATE_BOUNDS.0
        ));
    }
    let a = grid[best - 1];
    let b = grid[(best + 1).min(RATE_NODES - 1)];
    let ln_b = golden(|g| fit(g).map_or(f64::INFINITY, |s| s.sse), a, b);
    let sol = fit(ln_b)
        .or_else(|| fit(grid[best]))
        .ok_or("singular exponential fit")?;
    let t_inf = sol.coef[0];
    if t_inf.is_finite() {
        Ok(t_inf)
    } else {
        Err(String::from("exponential approach diverged"))
    }
}

fn golden<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    const G: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - G * (hi - lo);
    let mut x2 = lo + G * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..120 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - G * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + G * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

pub fn linear_fixed_point(x: &[f64], y: &[f64], span: usize) -> core::result::Result<f64, String> {
    let m = span.min(x.len());
    if m < 2 {
        return Err(String::from(
            "linear extrapolation needs at least two points",
        ));
    }
    let xs = &x[x.len() - m..];
    let ys = &y[y.len() - m..];
    let mean = xs.iter().sum::<f64>() / m as f64;
    let centred: Vec<f64> = xs.iter().map(|v| v - mean).collect();
    let ones: Vec<f64> = xs.iter().map(|_| 1.0).collect();
    let sol = lstsq(&[&ones, &centred], ys).ok_or("degenerate end dates")?;
    let (level, slope) = (sol.coef[0], sol.coef[1]);
    if slope < 1.0 {
        // level + slope (e - mean) = e
        Ok((level - slope * mean) / (1.0 - slope))
    } else {
        Ok(level + slope * (xs[m - 1] - mean))
    }
}
