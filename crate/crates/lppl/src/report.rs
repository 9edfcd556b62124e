//! JSON documents written by the commands.

use chrono::NaiveDate;
use lppl_core::forecast::ForecastMethod;
use lppl_core::rolling::{ExtrapolationResult, StabilizationReport};
use lppl_core::{Basis, FitResult};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::formats::RejectedRow;

/// `fit.json`: the fit result plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    #[serde(flatten)]
    pub result: FitResult,
    pub basis: Basis,
    pub rejected_rows: Vec<RejectedRow>,
    pub inputs_digest: String,
}

/// `stability.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    #[serde(flatten)]
    pub report: StabilizationReport,
    pub threshold_days: f64,
    /// Span actually used; shorter than configured when the sweep is short.
    pub span: usize,
    pub inputs_digest: String,
}

/// `extrapolation.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationReport {
    #[serde(flatten)]
    pub result: ExtrapolationResult,
    /// Too few converged points to extrapolate; the range is the last value.
    pub degenerate: bool,
    pub basis: Basis,
    pub inputs_digest: String,
}

/// `forecast.json`. Price ranges are absent when they cannot be formed in
/// that currency (no deflator for a real-price fit, or nominal input).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub method: ForecastMethod,
    pub tc_low: f64,
    pub tc_high: f64,
    pub tc_low_date: NaiveDate,
    pub tc_high_date: NaiveDate,
    pub crash_window_start: NaiveDate,
    pub crash_window_end: NaiveDate,
    pub lead_months: f64,
    pub real_price_low: Option<f64>,
    pub real_price_high: Option<f64>,
    pub nominal_price_low: Option<f64>,
    pub nominal_price_high: Option<f64>,
    pub inputs_digest: String,
}

impl ForecastReport {
    /// One-paragraph plain-text summary.
    pub fn summary(&self) -> String {
        let method = match self.method {
            ForecastMethod::Lppl => "LPPL",
            ForecastMethod::HyperOsc => "hyperbolic-trend",
        };
        let tc = if self.tc_low_date == self.tc_high_date {
            format!("critical time {:.3} ({})", self.tc_low, self.tc_low_date)
        } else {
            format!(
                "critical time between {:.3} and {:.3} ({} to {})",
                self.tc_low, self.tc_high, self.tc_low_date, self.tc_high_date
            )
        };
        let mut text = format!(
            "The {method} analysis places the {tc}. Allowing a lead of {} months, the crash window \
             runs from {} to {}.",
            self.lead_months, self.crash_window_start, self.crash_window_end
        );
        let range =
            |lo: Option<f64>, hi: Option<f64>| lo.zip(hi).map(|(l, h)| format!("{l:.2} to {h:.2}"));
        if let Some(r) = range(self.real_price_low, self.real_price_high) {
            text.push_str(&format!(
                " Estimated price level in base-period currency: {r}."
            ));
        }
        if let Some(r) = range(self.nominal_price_low, self.nominal_price_high) {
            text.push_str(&format!(" Estimated price level in current currency: {r}."));
        }
        text.push('\n');
        text
    }
}

/// Hex SHA-256 over labelled parts, each length-prefixed.
pub fn digest<'a>(parts: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> String {
    let mut h = Sha256::new();
    for (label, bytes) in parts {
        h.update(label.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
