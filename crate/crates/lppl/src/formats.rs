//! CSV formats: price and deflator input, price output, rolling curves and
//! fitted-curve overlays.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! file re-parses to the exact in-memory values.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Read;

use chrono::NaiveDate;
use lppl_core::rolling::RollingPoint;
use lppl_core::{
    from_decimal_year, Basis, DeflatorSeries, ModelParams, Observation, Period, PriceSeries, Window,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Header names of the date and price columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Columns {
    pub date: String,
    pub price: String,
}

impl Default for Columns {
    fn default() -> Self {
        Self {
            date: "date".into(),
            price: "price".into(),
        }
    }
}

/// A data row left out of a parsed series. `row` is the 1-based line
/// number, counting the header as line 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedRow {
    pub row: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPrices {
    pub series: PriceSeries,
    pub rejected: Vec<RejectedRow>,
}

fn read_all<R: Read>(mut input: R, file: &str) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(Error::io(file))?;
    Ok(bytes)
}

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes)
}

/// 1-based line of a record, counted from the raw bytes so blank lines count.
/// A record's reported start can sit on blank lines the reader skipped.
fn line_of(bytes: &[u8], record: &csv::StringRecord) -> u64 {
    let mut offset = record.position().map_or(0, |p| p.byte() as usize);
    while matches!(bytes.get(offset), Some(b'\n' | b'\r')) {
        offset += 1;
    }
    1 + bytes[..offset.min(bytes.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count() as u64
}

fn column(headers: &csv::StringRecord, name: &str, file: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn {
            file: file.into(),
            column: name.into(),
        })
}

/// Parse a price CSV with a header row. Rows with an unreadable date or a
/// missing, unreadable or non-positive price are collected in `rejected`;
/// the remaining rows are sorted by date.
pub fn parse_price_csv<R: Read>(
    input: R,
    columns: &Columns,
    basis: Basis,
    file: &str,
) -> Result<ParsedPrices> {
    let bytes = read_all(input, file)?;
    let mut rdr = reader(&bytes);
    let headers = rdr.headers().map_err(Error::csv(file))?.clone();
    if headers.iter().all(str::is_empty) {
        return Err(Error::EmptyFile(file.into()));
    }
    let date_col = column(&headers, &columns.date, file)?;
    let price_col = column(&headers, &columns.price, file)?;

    let mut observations = Vec::new();
    let mut rejected = Vec::new();
    let mut rows = 0usize;
    for record in rdr.records() {
        let record = record.map_err(Error::csv(file))?;
        let row = line_of(&bytes, &record);
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows += 1;
        match parse_row(&record, date_col, price_col) {
            Ok(obs) => observations.push(obs),
            Err(reason) => rejected.push(RejectedRow { row, reason }),
        }
    }
    if rows == 0 {
        return Err(Error::EmptyFile(file.into()));
    }
    if observations.is_empty() {
        return Err(Error::AllRowsRejected {
            file: file.into(),
            rejected,
        });
    }

    let mut seen = BTreeSet::new();
    let duplicates: BTreeSet<NaiveDate> = observations
        .iter()
        .filter(|o| !seen.insert(o.date))
        .map(|o| o.date)
        .collect();
    if !duplicates.is_empty() {
        return Err(Error::DuplicateDates {
            file: file.into(),
            dates: duplicates.into_iter().collect(),
        });
    }
    Ok(ParsedPrices {
        series: PriceSeries::from_unsorted(observations, basis)?,
        rejected,
    })
}

fn parse_row(
    record: &csv::StringRecord,
    date_col: usize,
    price_col: usize,
) -> Result<Observation, String> {
    let date_text = record.get(date_col).unwrap_or("");
    let date = NaiveDate::parse_from_str(date_text, "%Y-%m-%d")
        .map_err(|_| format!("unparseable date `{date_text}`"))?;
    let price_text = record.get(price_col).unwrap_or("");
    let price: f64 = price_text
        .parse()
        .map_err(|_| format!("unparseable price `{price_text}`"))?;
    if !(price > 0.0 && price.is_finite()) {
        return Err(format!("non-positive price {price_text}"));
    }
    Ok(Observation::new(date, price))
}

/// `date,price` CSV accepted by [`parse_price_csv`] with default columns.
pub fn write_price_csv(series: &PriceSeries) -> String {
    let mut out = String::from("date,price\n");
    for o in series.observations() {
        writeln!(out, "{},{}", o.date, o.price).unwrap();
    }
    out
}

/// Parse a `period,index` deflator CSV. Any bad row is an error. The base
/// period defaults to the first row.
pub fn parse_deflator_csv<R: Read>(
    input: R,
    base: Option<Period>,
    file: &str,
) -> Result<DeflatorSeries> {
    let bytes = read_all(input, file)?;
    let mut rdr = reader(&bytes);
    let headers = rdr.headers().map_err(Error::csv(file))?.clone();
    if headers.iter().all(str::is_empty) {
        return Err(Error::EmptyFile(file.into()));
    }
    let period_col = column(&headers, "period", file)?;
    let index_col = column(&headers, "index", file)?;
    let mut entries = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(Error::csv(file))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = line_of(&bytes, &record);
        let bad = |reason: String| Error::BadRow {
            file: file.into(),
            row,
            reason,
        };
        let period_text = record.get(period_col).unwrap_or("");
        let period: Period = period_text
            .parse()
            .map_err(|_| bad(format!("unparseable period `{period_text}`")))?;
        let index_text = record.get(index_col).unwrap_or("");
        let index: f64 = index_text
            .parse()
            .map_err(|_| bad(format!("unparseable index `{index_text}`")))?;
        entries.push((period, index));
    }
    let Some(&(first, _)) = entries.first() else {
        return Err(Error::EmptyFile(file.into()));
    };
    Ok(DeflatorSeries::new(entries, base.unwrap_or(first))?)
}

pub const ROLLING_HEADER: &str = "end_date,tc_decimal,tc_date,A,sse,converged";

/// One row per sweep point; `tc_date` is the nearest calendar day.
pub fn write_rolling_csv(points: &[RollingPoint]) -> Result<String> {
    let mut out = format!("{ROLLING_HEADER}\n");
    for p in points {
        let tc_date = from_decimal_year(p.tc.into())?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.end_date, p.tc, tc_date, p.a, p.sse, p.converged
        )
        .unwrap();
    }
    Ok(out)
}

#[derive(Deserialize)]
struct RollingRow {
    end_date: NaiveDate,
    tc_decimal: f64,
    #[allow(dead_code)]
    tc_date: NaiveDate,
    #[serde(rename = "A")]
    a: f64,
    sse: f64,
    converged: bool,
}

pub fn parse_rolling_csv<R: Read>(input: R, file: &str) -> Result<Vec<RollingPoint>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    rdr.deserialize::<RollingRow>()
        .map(|row| {
            let row = row.map_err(Error::csv(file))?;
            Ok(RollingPoint {
                end_date: row.end_date,
                tc: row.tc_decimal,
                a: row.a,
                sse: row.sse,
                converged: row.converged,
            })
        })
        .collect()
}

/// `date,observed,fitted` over the window, both columns in price units.
pub fn write_curve_csv(
    model: &ModelParams,
    series: &PriceSeries,
    window: &Window,
) -> Result<String> {
    let mut out = String::from("date,observed,fitted\n");
    for o in series
        .observations()
        .iter()
        .filter(|o| window.contains(o.date))
    {
        writeln!(out, "{},{},{}", o.date, o.price, model.price(o.time())?).unwrap();
    }
    Ok(out)
}
