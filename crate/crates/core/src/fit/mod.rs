//! Least-squares estimation of the bubble models.
//!
//! All fitters share the same shape: the parameters that enter linearly are
//! solved exactly for any fixed value of the nonlinear ones, an exhaustive
//! grid over the nonlinear parameters seeds a multi-start damped
//! Gauss-Newton refinement, and the best refined candidate wins.

mod hyper;
mod lppl;

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::calendar::to_decimal_year;
use crate::error::{Error, Result};
use crate::model::{ModelParams, Space};
use crate::series::{PriceSeries, Window};

pub use hyper::{fit_hyper_osc, fit_hyper_trend, fit_osc_residuals, OscFit};
pub use lppl::{fit_lppl, fit_lppl_from, gradient_check, GradientCheck, LpplProblem, Profile};

/// Smallest window a fit accepts.
pub const MIN_WINDOW: usize = 50;

/// Refined SSEs within this relative distance are ties, broken by smaller
/// critical time, then smaller log-frequency.
pub const TIE_RTOL: f64 = 1e-12;

/// Stationarity threshold for a returned optimum.
///
/// With `g_j` the derivative of SSE with respect to nonlinear parameter `j`
/// and `w_j` the width of its search interval, an optimum is stationary when
/// `|| g_j w_j || <= GRADIENT_RTOL * sse + GRADIENT_ATOL * sum(y^2)` over the
/// coordinates not pinned at a bound.
pub const GRADIENT_RTOL: f64 = 1e-3;
pub const GRADIENT_ATOL: f64 = 1e-12;

/// Closed interval serialized as `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval(pub f64, pub f64);

impl Interval {
    pub fn low(&self) -> f64 {
        self.0
    }

    pub fn high(&self) -> f64 {
        self.1
    }

    pub fn width(&self) -> f64 {
        self.1 - self.0
    }

    fn check(&self, name: &str) -> Result<()> {
        if self.0.is_finite() && self.1.is_finite() && self.0 < self.1 {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "{name} interval [{}, {}] is degenerate",
                self.0, self.1
            )))
        }
    }

    /// `n` evenly spaced nodes including both ends.
    fn linspace(&self, n: usize) -> Vec<f64> {
        let step = self.width() / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.1
                } else {
                    self.0 + step * i as f64
                }
            })
            .collect()
    }

    /// `n` geometrically spaced nodes including both ends; needs `low > 0`.
    fn geomspace(&self, n: usize) -> Vec<f64> {
        use num_traits::Float;
        let ratio = (self.1 / self.0).ln() / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.1
                } else {
                    self.0 * (ratio * i as f64).exp()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridNodes {
    pub tc: usize,
    pub alpha: usize,
    pub omega: usize,
}

impl Default for GridNodes {
    fn default() -> Self {
        Self {
            tc: 48,
            alpha: 10,
            omega: 96,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
}

/// Search space and stopping rules shared by every fitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub space: Space,
    /// Critical-time search range as offsets in years past the window end.
    /// Grid nodes are spaced geometrically in the offset.
    pub tc_offset: Interval,
    pub alpha: Interval,
    /// Also search the negative mirror of `alpha`.
    pub mirror_alpha: bool,
    pub omega: Interval,
    pub grid: GridNodes,
    /// Number of grid candidates handed to the local refinement.
    pub multistart: usize,
    pub max_iterations: usize,
    /// Relative SSE improvement below which a refinement stops.
    pub tolerance: f64,
    pub weighting: Weighting,
    /// Trend-singularity range for the hyperbolic model, years past the window end.
    pub hyper_tc_offset: Interval,
    pub hyper_tc_nodes: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            space: Space::Price,
            tc_offset: Interval(5.0 / 365.25, 2.0),
            alpha: Interval(0.05, 1.2),
            mirror_alpha: false,
            omega: Interval(2.0, 40.0),
            grid: GridNodes::default(),
            multistart: 10,
            max_iterations: 200,
            tolerance: 1e-10,
            weighting: Weighting::Uniform,
            hyper_tc_offset: Interval(5.0 / 365.25, 10.0),
            hyper_tc_nodes: 400,
        }
    }
}

impl FitConfig {
    /// Grid nodes `[tc, alpha, omega]` searched by the LPPL fit for data
    /// ending at `end_time`.
    pub fn lppl_grid(&self, end_time: f64) -> [Vec<f64>; 3] {
        let tcs = self
            .tc_offset
            .geomspace(self.grid.tc)
            .into_iter()
            .map(|o| end_time + o)
            .collect();
        let positive = self.alpha.linspace(self.grid.alpha);
        let mut alphas: Vec<f64> = Vec::new();
        if self.mirror_alpha {
            alphas.extend(positive.iter().rev().map(|a| -a));
        }
        alphas.extend(&positive);
        [tcs, alphas, self.omega.linspace(self.grid.omega)]
    }

    pub fn validate(&self) -> Result<()> {
        self.tc_offset.check("tc_offset")?;
        self.alpha.check("alpha")?;
        self.omega.check("omega")?;
        self.hyper_tc_offset.check("hyper_tc_offset")?;
        if self.tc_offset.high() <= 0.0 || self.hyper_tc_offset.high() <= 0.0 {
            return Err(Error::NoFeasibleTc);
        }
        if self.tc_offset.low() <= 0.0 || self.hyper_tc_offset.low() <= 0.0 {
            return Err(Error::InvalidConfig(
                "critical-time lower bound must lie strictly after the window end".into(),
            ));
        }
        if self.alpha.low() <= 0.0 {
            return Err(Error::InvalidConfig(
                "alpha interval must be positive; use mirror_alpha for negative exponents".into(),
            ));
        }
        if self.omega.low() <= 0.0 {
            return Err(Error::InvalidConfig(
                "omega interval must be positive".into(),
            ));
        }
        let nodes = [
            self.grid.tc,
            self.grid.alpha,
            self.grid.omega,
            self.hyper_tc_nodes,
        ];
        if nodes.iter().any(|&n| n < 2) {
            return Err(Error::InvalidConfig(
                "every grid needs at least 2 nodes".into(),
            ));
        }
        if self.multistart == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "multistart and max_iterations must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one fit over one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ModelParams,
    /// Sum of squared residuals in the fit space.
    pub sse: f64,
    pub n_points: usize,
    pub converged: bool,
    pub candidates_evaluated: usize,
    /// First and last observation dates actually used.
    pub window: Window,
}

/// Times and fit-space values of the observations inside `window`.
pub(crate) struct WindowData {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub window: Window,
    pub end_time: f64,
}

impl WindowData {
    pub fn new(series: &PriceSeries, window: &Window, space: Space) -> Result<Self> {
        let sub = series
            .slice(window.start, window.end)
            .map_err(|e| match e {
                Error::EmptySeries => Error::WindowTooShort {
                    got: 0,
                    need: MIN_WINDOW,
                },
                e => e,
            })?;
        if sub.len() < MIN_WINDOW {
            return Err(Error::WindowTooShort {
                got: sub.len(),
                need: MIN_WINDOW,
            });
        }
        let values = sub
            .prices()
            .into_iter()
            .map(|p| space.transform(p))
            .collect();
        Ok(Self {
            times: sub.times(),
            values,
            window: sub.window(),
            end_time: to_decimal_year(sub.last_date()).value(),
        })
    }
}

/// Ranking key for refined candidates, see [`TIE_RTOL`].
pub(crate) fn better(sse: f64, tc: f64, omega: f64, best: (f64, f64, f64)) -> bool {
    let (bs, btc, bom) = best;
    let scale = sse.abs().max(bs.abs());
    if (sse - bs).abs() > TIE_RTOL * scale {
        return sse < bs;
    }
    (tc, omega) < (btc, bom)
}

/// Indices of grid nodes that are no worse than any feasible neighbour
/// (full 3^d neighbourhood), ranked by SSE then index, followed by the
/// remaining feasible nodes in the same order. `dims` is row-major.
pub(crate) fn rank_grid(sse: &[f64], dims: &[usize]) -> Vec<usize> {
    let total = sse.len();
    let mut minima = Vec::new();
    let mut rest = Vec::new();
    let mut coords = alloc::vec![0usize; dims.len()];
    for idx in 0..total {
        let v = sse[idx];
        if !v.is_finite() {
            continue;
        }
        let mut rem = idx;
        for d in (0..dims.len()).rev() {
            coords[d] = rem % dims[d];
            rem /= dims[d];
        }
        if is_local_min(sse, dims, &coords, v) {
            minima.push(idx);
        } else {
            rest.push(idx);
        }
    }
    let key = |&i: &usize| (sse[i], i);
    minima.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    rest.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    minima.extend(rest);
    minima
}

fn is_local_min(sse: &[f64], dims: &[usize], coords: &[usize], v: f64) -> bool {
    let nd = dims.len();
    let combos = 3usize.pow(nd as u32);
    'outer: for c in 0..combos {
        let mut rem = c;
        let mut idx = 0usize;
        let mut is_self = true;
        for d in 0..nd {
            let off = (rem % 3) as isize - 1;
            rem /= 3;
            if off != 0 {
                is_self = false;
            }
            let pos = coords[d] as isize + off;
            if pos < 0 || pos >= dims[d] as isize {
                continue 'outer;
            }
            idx = idx * dims[d] + pos as usize;
        }
        if !is_self && sse[idx].is_finite() && sse[idx] < v {
            return false;
        }
    }
    true
}
