//! Conversions between calendar dates and decimal years.
//!
//! A date maps to `year + (day_of_year - 1) / days_in_year` with the actual
//! 365/366-day count, so January 1 is always an exact integer. The inverse
//! picks the nearest calendar day.

use alloc::vec::Vec;
use core::fmt;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Gregorian month length in days.
pub const MEAN_MONTH_DAYS: f64 = 30.44;

/// Mean Julian year length, used to express decimal-year spans in days.
pub const DAYS_PER_YEAR: f64 = 365.25;

/// A point on the continuous time axis, in years.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecimalYear(pub f64);

impl DecimalYear {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_date(self) -> Result<NaiveDate> {
        from_decimal_year(self)
    }
}

impl From<NaiveDate> for DecimalYear {
    fn from(date: NaiveDate) -> Self {
        to_decimal_year(date)
    }
}

impl From<f64> for DecimalYear {
    fn from(value: f64) -> Self {
        DecimalYear(value)
    }
}

impl fmt::Display for DecimalYear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

pub fn days_in_year(year: i32) -> u32 {
    if NaiveDate::from_ymd_opt(year, 2, 29).is_some() {
        366
    } else {
        365
    }
}

pub fn to_decimal_year(date: NaiveDate) -> DecimalYear {
    let year = date.year();
    let offset = f64::from(date.ordinal0()) / f64::from(days_in_year(year));
    DecimalYear(f64::from(year) + offset)
}

pub fn from_decimal_year(value: DecimalYear) -> Result<NaiveDate> {
    let v = value.0;
    if !v.is_finite() {
        return Err(Error::NonFiniteYear(v));
    }
    let year = v.floor();
    if year < f64::from(NaiveDate::MIN.year()) || year >= f64::from(NaiveDate::MAX.year()) {
        return Err(Error::YearOutOfRange(v));
    }
    let year = year as i32;
    let days = ((v - f64::from(year)) * f64::from(days_in_year(year))).round() as i64;
    NaiveDate::from_yo_opt(year, 1)
        .and_then(|jan1| jan1.checked_add_signed(Duration::days(days)))
        .ok_or(Error::YearOutOfRange(v))
}

/// Shift a date by a fractional number of days, rounding to the nearest day.
pub fn shift_days(date: NaiveDate, days: f64) -> Option<NaiveDate> {
    if !days.is_finite() {
        return None;
    }
    date.checked_add_signed(Duration::days(days.round() as i64))
}

/// `count` consecutive Monday-to-Friday dates starting at `start` (or the
/// first weekday after it).
pub fn weekdays(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut day = start;
    while out.len() < count {
        if !matches!(day.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(day);
        }
        day = day
            .succ_opt()
            .expect("weekday sequence ran past the calendar");
    }
    out
}
