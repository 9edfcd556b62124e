//! Log-periodic power-law (LPPL) and hyperbolic bubble models.
//!
//! The crate is `no_std` (with `alloc`) and purely computational: calendar
//! conversion, price series and deflation, model evaluation, least-squares
//! fitting, rolling end-date sweeps and crash-window forecasts. File formats
//! and the command-line driver live in the `lppl` crate.
#![no_std]
// `num_traits::Float` supplies float math without std; when std is anywhere in
// the crate graph its inherent methods win and those imports read as unused.
#![allow(unused_imports)]
// Negated comparisons are used on purpose to reject NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod calendar;
pub mod error;
pub mod fit;
pub mod forecast;
pub mod linalg;
mod lm;
pub mod model;
pub mod rolling;
pub mod series;

pub use calendar::{from_decimal_year, to_decimal_year, DecimalYear};
pub use error::{Error, Result};
pub use fit::{fit_hyper_osc, fit_hyper_trend, fit_lppl, fit_osc_residuals, FitConfig, FitResult};
pub use model::{
    eval_hyper_osc, eval_lppl, residuals, scaling_factor, synthesize, HyperOscParams, LpplParams,
    ModelParams, OscParams, Space, SynthSpec,
};
pub use series::{deflate, slice, Basis, DeflatorSeries, Observation, Period, PriceSeries, Window};
