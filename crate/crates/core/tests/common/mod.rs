#![allow(dead_code)]

use chrono::NaiveDate;
use lppl_core::calendar::weekdays;
use lppl_core::{synthesize, to_decimal_year, LpplParams, PriceSeries, Space, SynthSpec};

pub fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Weekday dates from `start` and the decimal year of the last one.
pub fn dates(start: NaiveDate, count: usize) -> (Vec<NaiveDate>, f64) {
    let d = weekdays(start, count);
    let end = to_decimal_year(*d.last().unwrap()).value();
    (d, end)
}

/// Gold-magnitude LPPL with its critical time `lead` years past `end`.
pub fn gold_like(end: f64, lead: f64) -> LpplParams {
    LpplParams {
        a: 1220.41,
        m: 570.35,
        c: 0.036,
        alpha: 0.267,
        omega: 15.86,
        phi: -34.8,
        tc: end + lead,
        space: Space::Price,
    }
}

pub fn synth(params: LpplParams, dates: &[NaiveDate], sigma: f64, seed: u64) -> PriceSeries {
    synthesize(&SynthSpec {
        model: params.into(),
        dates: dates.to_vec(),
        noise_sigma: sigma,
        seed,
    })
    .unwrap()
}

pub fn sse(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

pub fn days(years: f64) -> f64 {
    years * 365.25
}
