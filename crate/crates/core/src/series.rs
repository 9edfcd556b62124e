//! Daily price series, monthly deflators and window slicing.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calendar::to_decimal_year;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: NaiveDate,
    pub price: f64,
}

impl Observation {
    pub fn new(date: NaiveDate, price: f64) -> Self {
        Self { date, price }
    }

    pub fn time(&self) -> f64 {
        to_decimal_year(self.date).value()
    }
}

/// A calendar month, the granularity of deflator indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Period {
    pub year: i32,
    pub month: u32,
}

impl Period {
    pub fn new(year: i32, month: u32) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        Self {
            year: date.year(),
            month: date.month(),
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsePeriodError(pub String);

impl fmt::Display for ParsePeriodError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid period {:?}, expected YYYY-MM", self.0)
    }
}

impl FromStr for Period {
    type Err = ParsePeriodError;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        let err = || ParsePeriodError(s.into());
        let (y, m) = s.trim().split_once('-').ok_or_else(err)?;
        let year = y.parse().map_err(|_| err())?;
        let month = m.parse().map_err(|_| err())?;
        Period::new(year, month).ok_or_else(err)
    }
}

impl Serialize for Period {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Whether prices are in current currency or rescaled to a base period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Nominal,
    Real { base: Period },
}

/// Closed date interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Window {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::InvertedWindow { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

/// Strictly date-ordered, positive daily prices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeries {
    observations: Vec<Observation>,
    basis: Basis,
}

impl PriceSeries {
    pub fn new(observations: Vec<Observation>, basis: Basis) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptySeries);
        }
        let mut duplicates = BTreeSet::new();
        for pair in observations.windows(2) {
            if pair[1].date == pair[0].date {
                duplicates.insert(pair[1].date);
            } else if pair[1].date < pair[0].date {
                return Err(Error::UnorderedDates(pair[1].date));
            }
        }
        if !duplicates.is_empty() {
            return Err(Error::DuplicateDates(duplicates.into_iter().collect()));
        }
        if let Some(bad) = observations
            .iter()
            .find(|o| !(o.price.is_finite() && o.price > 0.0))
        {
            return Err(Error::NonPositivePrice {
                date: bad.date,
                price: bad.price,
            });
        }
        Ok(Self {
            observations,
            basis,
        })
    }

    /// Sorts by date before validating.
    pub fn from_unsorted(mut observations: Vec<Observation>, basis: Basis) -> Result<Self> {
        observations.sort_by_key(|o| o.date);
        Self::new(observations, basis)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.observations[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.observations[self.observations.len() - 1].date
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.observations.iter().map(|o| o.date)
    }

    pub fn times(&self) -> Vec<f64> {
        self.observations.iter().map(Observation::time).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.price).collect()
    }

    pub fn window(&self) -> Window {
        Window {
            start: self.first_date(),
            end: self.last_date(),
        }
    }

    pub fn slice(&self, start: NaiveDate, end: NaiveDate) -> Result<Self> {
        slice(self, start, end)
    }
}

impl<'de> Deserialize<'de> for PriceSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            observations: Vec<Observation>,
            basis: Basis,
        }
        let raw = Raw::deserialize(deserializer)?;
        PriceSeries::new(raw.observations, raw.basis).map_err(serde::de::Error::custom)
    }
}

pub fn slice(series: &PriceSeries, start: NaiveDate, end: NaiveDate) -> Result<PriceSeries> {
    let window = Window::new(start, end)?;
    let observations: Vec<_> = series
        .observations
        .iter()
        .filter(|o| window.contains(o.date))
        .copied()
        .collect();
    if observations.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(PriceSeries {
        observations,
        basis: series.basis,
    })
}

/// Monthly price index, e.g. a producer price index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeflatorSeries {
    entries: Vec<(Period, f64)>,
    base_period: Period,
}

impl DeflatorSeries {
    pub fn new(entries: Vec<(Period, f64)>, base_period: Period) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDeflator("no entries"));
        }
        if entries.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidDeflator(
                "periods are not strictly increasing",
            ));
        }
        if entries.iter().any(|&(_, v)| !(v.is_finite() && v > 0.0)) {
            return Err(Error::InvalidDeflator("index values must be positive"));
        }
        let deflator = Self {
            entries,
            base_period,
        };
        deflator.index(base_period)?;
        Ok(deflator)
    }

    pub fn entries(&self) -> &[(Period, f64)] {
        &self.entries
    }

    pub fn base_period(&self) -> Period {
        self.base_period
    }

    pub fn with_base(&self, base_period: Period) -> Result<Self> {
        Self::new(self.entries.clone(), base_period)
    }

    pub fn index(&self, period: Period) -> Result<f64> {
        self.entries
            .binary_search_by_key(&period, |&(p, _)| p)
            .map(|i| self.entries[i].1)
            .map_err(|_| Error::UncoveredPeriod(period))
    }

    /// Latest covered period not after `period`, with its index.
    pub fn latest_at_or_before(&self, period: Period) -> Option<(Period, f64)> {
        let idx = self.entries.partition_point(|&(p, _)| p <= period);
        idx.checked_sub(1).map(|i| self.entries[i])
    }
}

/// Rescale nominal prices to the purchasing power of `base`.
///
/// Every day of a month uses that month's index.
pub fn deflate(
    series: &PriceSeries,
    deflator: &DeflatorSeries,
    base: Period,
) -> Result<PriceSeries> {
    if let Basis::Real { .. } = series.basis {
        return Err(Error::AlreadyReal);
    }
    let base_index = deflator.index(base)?;
    let observations = series
        .observations
        .iter()
        .map(|o| {
            let index = deflator.index(Period::of(o.date))?;
            Ok(Observation::new(o.date, o.price * base_index / index))
        })
        .collect::<Result<Vec<_>>>()?;
    PriceSeries::new(observations, Basis::Real { base })
}
