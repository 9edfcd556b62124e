//! Log-periodic power-law and hyperbolic-trend price models.
//!
//! With `tau = tc - t` the LPPL form is
//!
//! ```text
//! y(t) = A - m tau^alpha (1 + C cos(omega ln tau + phi))
//! ```
//!
//! where `y` is either the price or its logarithm. The hyperbolic
//! alternative is a growing trend `A / (tc1 - t)^B` plus a constant-amplitude
//! oscillation `C cos(omega ln(tc2 - t) + phi)` with its own singularity.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use chrono::NaiveDate;
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::calendar::to_decimal_year;
use crate::error::{Error, Result};
use crate::series::{Basis, Observation, PriceSeries, Window};

/// Quantity the model describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    #[default]
    Price,
    #[serde(alias = "log")]
    LogPrice,
}

impl Space {
    /// Map a price into this space.
    pub fn transform(self, price: f64) -> f64 {
        match self {
            Space::Price => price,
            Space::LogPrice => price.ln(),
        }
    }

    /// Map a model value back to a price.
    pub fn to_price(self, value: f64) -> f64 {
        match self {
            Space::Price => value,
            Space::LogPrice => value.exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpplParams {
    /// Level reached at the critical time.
    pub a: f64,
    pub m: f64,
    /// Relative oscillation amplitude.
    pub c: f64,
    pub alpha: f64,
    /// Log-frequency, radians per unit of `ln(tc - t)`.
    pub omega: f64,
    /// Phase in radians, stored as fitted (not reduced).
    pub phi: f64,
    /// Critical time as a decimal year.
    pub tc: f64,
    pub space: Space,
}

impl LpplParams {
    pub fn eval(&self, t: f64) -> Result<f64> {
        eval_lppl(self, t)
    }

    /// The trend part `A - m tau^alpha`, without oscillation.
    pub fn trend(&self, t: f64) -> Result<f64> {
        let tau = time_to(self.tc, t)?;
        Ok(self.a - self.m * tau.powf(self.alpha))
    }

    /// Coefficients of the basis `[1, f, f cos(omega ln tau), f sin(omega ln tau)]`
    /// with `f = tau^alpha` that reproduce this model.
    pub fn linear_coefficients(&self) -> [f64; 4] {
        [
            self.a,
            -self.m,
            -self.m * self.c * self.phi.cos(),
            self.m * self.c * self.phi.sin(),
        ]
    }

    /// Inverse of [`linear_coefficients`](Self::linear_coefficients).
    ///
    /// `None` when the trend coefficient vanishes, which leaves `C` and
    /// `phi` undefined.
    pub fn from_linear(
        coef: [f64; 4],
        tc: f64,
        alpha: f64,
        omega: f64,
        space: Space,
    ) -> Option<Self> {
        let [a, b, c1, c2] = coef;
        if b == 0.0 || !b.is_finite() {
            return None;
        }
        let m = -b;
        // -m C cos(phi) = c1, m C sin(phi) = c2
        let cos_part = -c1 / m;
        let sin_part = c2 / m;
        let c = cos_part.hypot(sin_part);
        let phi = if c == 0.0 {
            0.0
        } else {
            sin_part.atan2(cos_part)
        };
        Some(Self {
            a,
            m,
            c,
            alpha,
            omega,
            phi,
            tc,
            space,
        })
    }
}

/// Oscillation `C cos(omega ln(tc - t) + phi)` with constant amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscParams {
    pub c: f64,
    pub omega: f64,
    pub phi: f64,
    pub tc: f64,
}

impl OscParams {
    pub const ZERO: OscParams = OscParams {
        c: 0.0,
        omega: 0.0,
        phi: 0.0,
        tc: f64::INFINITY,
    };

    pub fn eval(&self, t: f64) -> Result<f64> {
        if self.c == 0.0 {
            return Ok(0.0);
        }
        let tau = time_to(self.tc, t)?;
        Ok(self.c * (self.omega * tau.ln() + self.phi).cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperOscParams {
    pub a: f64,
    /// Trend exponent; the trend is `A / (tc1 - t)^B`.
    pub b: f64,
    pub tc1: f64,
    /// Absolute oscillation amplitude in price units.
    pub c: f64,
    pub omega: f64,
    pub phi: f64,
    pub tc2: f64,
}

impl HyperOscParams {
    pub fn trend(&self, t: f64) -> Result<f64> {
        let tau = time_to(self.tc1, t)?;
        Ok(self.a / tau.powf(self.b))
    }

    pub fn oscillation(&self) -> OscParams {
        OscParams {
            c: self.c,
            omega: self.omega,
            phi: self.phi,
            tc: self.tc2,
        }
    }

    pub fn with_oscillation(mut self, osc: OscParams) -> Self {
        self.c = osc.c;
        self.omega = osc.omega;
        self.phi = osc.phi;
        self.tc2 = osc.tc;
        self
    }

    /// Trend only, with the oscillation switched off.
    pub fn trend_only(&self) -> Self {
        self.with_oscillation(OscParams {
            tc: self.tc1,
            ..OscParams::ZERO
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        eval_hyper_osc(self, t)
    }
}

/// Either fitted model family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    Lppl(LpplParams),
    HyperOsc(HyperOscParams),
}

impl ModelParams {
    /// Model value in its own space (log-price for log-space LPPL).
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            ModelParams::Lppl(p) => eval_lppl(p, t),
            ModelParams::HyperOsc(p) => eval_hyper_osc(p, t),
        }
    }

    /// Model value converted to a price.
    pub fn price(&self, t: f64) -> Result<f64> {
        Ok(self.space().to_price(self.eval(t)?))
    }

    pub fn space(&self) -> Space {
        match self {
            ModelParams::Lppl(p) => p.space,
            ModelParams::HyperOsc(_) => Space::Price,
        }
    }

    /// Earliest time at which the model is undefined.
    pub fn singularity(&self) -> f64 {
        match self {
            ModelParams::Lppl(p) => p.tc,
            ModelParams::HyperOsc(p) if p.c == 0.0 => p.tc1,
            ModelParams::HyperOsc(p) => p.tc1.min(p.tc2),
        }
    }
}

impl From<LpplParams> for ModelParams {
    fn from(p: LpplParams) -> Self {
        ModelParams::Lppl(p)
    }
}

impl From<HyperOscParams> for ModelParams {
    fn from(p: HyperOscParams) -> Self {
        ModelParams::HyperOsc(p)
    }
}

fn time_to(tc: f64, t: f64) -> Result<f64> {
    let tau = tc - t;
    if tau > 0.0 && tau.is_finite() {
        Ok(tau)
    } else {
        Err(Error::SingularityCrossed { t, tc })
    }
}

pub fn eval_lppl(p: &LpplParams, t: f64) -> Result<f64> {
    let tau = time_to(p.tc, t)?;
    let osc = 1.0 + p.c * (p.omega * tau.ln() + p.phi).cos();
    Ok(p.a - p.m * tau.powf(p.alpha) * osc)
}

pub fn eval_hyper_osc(p: &HyperOscParams, t: f64) -> Result<f64> {
    Ok(p.trend(t)? + p.oscillation().eval(t)?)
}

/// Ratio by which successive oscillation periods shrink: `exp(2 pi / omega)`.
pub fn scaling_factor(omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::NonPositiveOmega(omega));
    }
    Ok((TAU / omega).exp())
}

/// Reduce a phase to `[-pi, pi)`.
pub fn normalize_phase(phi: f64) -> f64 {
    let shifted = phi + PI;
    let r = shifted - TAU * (shifted / TAU).floor() - PI;
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Per-observation `model - data` inside `window`, in the model's space.
pub fn residuals(model: &ModelParams, series: &PriceSeries, window: &Window) -> Result<Vec<f64>> {
    let space = model.space();
    series
        .observations()
        .iter()
        .filter(|o| window.contains(o.date))
        .map(|o| Ok(model.eval(o.time())? - space.transform(o.price)))
        .collect()
}

/// Inputs for a reproducible synthetic price series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub model: ModelParams,
    pub dates: Vec<NaiveDate>,
    /// Standard deviation of the multiplicative Gaussian noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

/// Model prices times `1 + sigma * N(0, 1)`, deterministic per seed.
pub fn synthesize(spec: &SynthSpec) -> Result<PriceSeries> {
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::InvalidNoise(spec.noise_sigma));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut observations = Vec::with_capacity(spec.dates.len());
    for &date in &spec.dates {
        let t = to_decimal_year(date).value();
        let value = spec.model.price(t)?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveModelValue { t, value });
        }
        let eps: f64 = StandardNormal.sample(&mut rng);
        let price = value * (1.0 + spec.noise_sigma * eps);
        if !(price > 0.0) {
            return Err(Error::NonPositiveModelValue { t, value: price });
        }
        observations.push(Observation::new(date, price));
    }
    PriceSeries::new(observations, Basis::Nominal)
}
