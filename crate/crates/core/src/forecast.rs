//! Crash windows and price levels derived from critical-time estimates.
//!
//! Crashes tend to start before the critical time itself; the default lead
//! is 1.4 months of 30.44 days.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::calendar::{from_decimal_year, shift_days, to_decimal_year, MEAN_MONTH_DAYS};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::series::{DeflatorSeries, Period};

pub const DEFAULT_LEAD_MONTHS: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastMethod {
    Lppl,
    HyperOsc,
}

/// Convert a critical-time range to the calendar window where the crash is
/// expected: each bound goes to its nearest date and moves earlier by
/// `lead_months * 30.44` days, rounded to a whole day.
pub fn crash_window(tc_low: f64, tc_high: f64, lead_months: f64) -> Result<(NaiveDate, NaiveDate)> {
    if !(lead_months >= 0.0 && lead_months.is_finite()) {
        return Err(Error::InvalidLead(lead_months));
    }
    if tc_low > tc_high {
        return Err(Error::InvertedRange {
            low: tc_low,
            high: tc_high,
        });
    }
    let shift = -lead_months * MEAN_MONTH_DAYS;
    let bound = |tc: f64| {
        let date = from_decimal_year(tc.into())?;
        shift_days(date, shift).ok_or(Error::YearOutOfRange(tc))
    };
    Ok((bound(tc_low)?, bound(tc_high)?))
}

/// Fitted model price at `crash_time` (decimal year).
pub fn price_at_crash(model: &ModelParams, crash_time: f64) -> Result<f64> {
    model.price(crash_time)
}

/// Range spanned by trailing `A(end)` estimates.
pub fn a_based_range(a_values: &[f64]) -> Result<(f64, f64)> {
    if a_values.is_empty() {
        return Err(Error::TooFewPoints { got: 0, need: 1 });
    }
    Ok(a_values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        }))
}

/// Real (base-period) price back to the currency of `period`.
pub fn nominal_from_real(real: f64, deflator: &DeflatorSeries, period: Period) -> Result<f64> {
    let base = deflator.index(deflator.base_period())?;
    Ok(real * deflator.index(period)? / base)
}

/// [`nominal_from_real`] at the latest deflator period not after `date`,
/// since forecasts usually reach past the published index.
pub fn nominal_at_latest(
    real: f64,
    deflator: &DeflatorSeries,
    date: NaiveDate,
) -> Result<(f64, Period)> {
    let target = Period::of(date);
    let (period, _) = deflator
        .latest_at_or_before(target)
        .ok_or(Error::UncoveredPeriod(target))?;
    Ok((nominal_from_real(real, deflator, period)?, period))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrashForecast {
    pub method: ForecastMethod,
    /// Critical-time range, decimal years.
    pub tc_range: (f64, f64),
    pub crash_window: (NaiveDate, NaiveDate),
    pub lead_months: f64,
    pub real_price_range: Option<(f64, f64)>,
    pub nominal_price_range: Option<(f64, f64)>,
}

impl CrashForecast {
    pub fn new(method: ForecastMethod, tc_range: (f64, f64), lead_months: f64) -> Result<Self> {
        let crash_window = crash_window(tc_range.0, tc_range.1, lead_months)?;
        Ok(Self {
            method,
            tc_range,
            crash_window,
            lead_months,
            real_price_range: None,
            nominal_price_range: None,
        })
    }

    /// Crash window bounds as decimal years.
    pub fn crash_times(&self) -> (f64, f64) {
        (
            to_decimal_year(self.crash_window.0).value(),
            to_decimal_year(self.crash_window.1).value(),
        )
    }

    /// Model prices at both crash-window bounds, ordered.
    pub fn model_price_range(&self, model: &ModelParams) -> Result<(f64, f64)> {
        let (t0, t1) = self.crash_times();
        let (p0, p1) = (price_at_crash(model, t0)?, price_at_crash(model, t1)?);
        Ok((p0.min(p1), p0.max(p1)))
    }
}
