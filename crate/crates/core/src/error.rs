use alloc::string::String;
use alloc::vec::Vec;

use chrono::NaiveDate;
use thiserror::Error;

use crate::series::Period;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("decimal year {0} is not finite")]
    NonFiniteYear(f64),
    #[error("decimal year {0} is outside the representable calendar range")]
    YearOutOfRange(f64),
    #[error("series is empty")]
    EmptySeries,
    #[error("observation dates are not strictly increasing at {0}")]
    UnorderedDates(NaiveDate),
    #[error("duplicate observation dates: {0:?}")]
    DuplicateDates(Vec<NaiveDate>),
    #[error("price {price} at {date} is not a positive finite number")]
    NonPositivePrice { date: NaiveDate, price: f64 },
    #[error("deflator has no index for {0}")]
    UncoveredPeriod(Period),
    #[error("deflator is invalid: {0}")]
    InvalidDeflator(&'static str),
    #[error("series is already expressed in real terms")]
    AlreadyReal,
    #[error("window start {start} is after window end {end}")]
    InvertedWindow { start: NaiveDate, end: NaiveDate },
    #[error("t = {t} is not before the singularity at {tc}")]
    SingularityCrossed { t: f64, tc: f64 },
    #[error("log-frequency must be positive, got {0}")]
    NonPositiveOmega(f64),
    #[error("model value {value} at t = {t} cannot form a price")]
    NonPositiveModelValue { t: f64, value: f64 },
    #[error("noise sigma must be finite and non-negative, got {0}")]
    InvalidNoise(f64),
    #[error("window holds {got} observations, at least {need} are required")]
    WindowTooShort { got: usize, need: usize },
    #[error("linear subproblem is singular at every grid node")]
    Degenerate,
    #[error("critical-time bounds exclude every feasible value")]
    NoFeasibleTc,
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(String),
    #[error("range is inverted: {low} > {high}")]
    InvertedRange { low: f64, high: f64 },
    #[error("lead must be finite and non-negative, got {0}")]
    InvalidLead(f64),
    #[error("{got} points available, at least {need} are required")]
    TooFewPoints { got: usize, need: usize },
    #[error("no end date leaves a usable fitting window")]
    NoValidEndDates,
}
