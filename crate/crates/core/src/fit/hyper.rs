use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{better, rank_grid, FitConfig, FitResult, Interval, WindowData, MIN_WINDOW};
use crate::error::{Error, Result};
use crate::linalg::lstsq;
use crate::lm::{self, LmOptions};
use crate::model::{HyperOscParams, ModelParams, OscParams, Space};
use crate::series::{PriceSeries, Window};

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Fit the growing hyperbola `p = A / (tc1 - t)^B`.
///
/// Regressing `ln p` on `ln(tc1 - t)` is linear for fixed `tc1`, so `tc1` is
/// scanned on a geometric grid and polished by golden-section search on the
/// bracket around the best node. The returned oscillation is zero.
pub fn fit_hyper_trend(
    series: &PriceSeries,
    window: &Window,
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    let data = WindowData::new(series, window, Space::LogPrice)?;
    let end = data.end_time;
    let nodes: Vec<f64> = config
        .hyper_tc_offset
        .geomspace(config.hyper_tc_nodes)
        .into_iter()
        .map(|o| end + o)
        .collect();

    let profile = |tc1: f64| trend_profile(&data.times, &data.values, tc1);
    let sse: Vec<f64> = nodes
        .iter()
        .map(|&tc| profile(tc).map_or(f64::NAN, |p| p.2))
        .collect();
    let best = sse
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or(Error::Degenerate)?;

    let lo = nodes[best.saturating_sub(1)];
    let hi = nodes[(best + 1).min(nodes.len() - 1)];
    let objective = |tc: f64| profile(tc).map_or(f64::INFINITY, |p| p.2);
    let tc1 = golden_section(objective, lo, hi);
    let (tc1, (a, b, sse)) = match profile(tc1) {
        Some(p) if p.2 <= sse[best] => (tc1, p),
        _ => (nodes[best], profile(nodes[best]).ok_or(Error::Degenerate)?),
    };
    // An optimum on the horizon means the singularity lies beyond the search range.
    let converged = best + 1 < nodes.len();
    Ok(FitResult {
        params: ModelParams::HyperOsc(
            HyperOscParams {
                a,
                b,
                tc1,
                c: 0.0,
                omega: 0.0,
                phi: 0.0,
                tc2: tc1,
            }
            .trend_only(),
        ),
        sse,
        n_points: data.times.len(),
        converged,
        candidates_evaluated: nodes.len(),
        window: data.window,
    })
}

/// `(A, B, sse)` of the log-linear regression at `tc1`; `None` unless `B > 0`.
fn trend_profile(times: &[f64], log_prices: &[f64], tc1: f64) -> Option<(f64, f64, f64)> {
    let ones: Vec<f64> = times.iter().map(|_| 1.0).collect();
    let mut x = Vec::with_capacity(times.len());
    for &t in times {
        let tau = tc1 - t;
        if !(tau > 0.0) {
            return None;
        }
        x.push(tau.ln());
    }
    let sol = lstsq(&[&ones, &x], log_prices)?;
    let b = -sol.coef[1];
    (b > 0.0).then(|| (sol.coef[0].exp(), b, sol.sse))
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + lo.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Constant-amplitude log-periodic fit to detrended residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscFit {
    pub params: OscParams,
    pub sse: f64,
    pub converged: bool,
    /// No oscillation signal: `C` is zero and `omega`, `phi` carry no information.
    pub degenerate: bool,
    pub candidates_evaluated: usize,
}

/// Fit `r(t) = C cos(omega ln(tc2 - t) + phi)` to `(time, residual)` pairs.
///
/// `tc2` is searched over `config.tc_offset` past the last time and `omega`
/// over `config.omega`; `(C cos phi, -C sin phi)` are solved linearly.
pub fn fit_osc_residuals(points: &[(f64, f64)], config: &FitConfig) -> Result<OscFit> {
    config.validate()?;
    if points.len() < MIN_WINDOW {
        return Err(Error::WindowTooShort {
            got: points.len(),
            need: MIN_WINDOW,
        });
    }
    let times: Vec<f64> = points.iter().map(|p| p.0).collect();
    let values: Vec<f64> = points.iter().map(|p| p.1).collect();
    let end = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tc_bounds = Interval(end + config.tc_offset.low(), end + config.tc_offset.high());

    if values.iter().all(|&v| v == 0.0) {
        return Ok(OscFit {
            params: OscParams {
                c: 0.0,
                omega: config.omega.low(),
                phi: 0.0,
                tc: tc_bounds.high(),
            },
            sse: 0.0,
            converged: true,
            degenerate: true,
            candidates_evaluated: 0,
        });
    }

    let problem = OscProblem {
        times: &times,
        values: &values,
        end,
    };
    let tcs: Vec<f64> = config
        .tc_offset
        .geomspace(config.grid.tc)
        .into_iter()
        .map(|o| end + o)
        .collect();
    let omegas = config.omega.linspace(config.grid.omega);
    let mut sse = Vec::with_capacity(tcs.len() * omegas.len());
    for &tc in &tcs {
        for &w in &omegas {
            sse.push(problem.solve(tc, w).map_or(f64::NAN, |s| s.1));
        }
    }
    let ranked = rank_grid(&sse, &[tcs.len(), omegas.len()]);
    if ranked.is_empty() {
        return Err(Error::Degenerate);
    }
    let node = |i: usize| [tcs[i / omegas.len()], omegas[i % omegas.len()]];
    let starts: Vec<[f64; 2]> = ranked
        .iter()
        .take(config.multistart)
        .map(|&i| node(i))
        .collect();

    let sum_sq = lm::sum_sq(&values);
    let opts = LmOptions {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        sse_floor: 1e-28 * sum_sq,
    };
    let lower = [tc_bounds.low(), config.omega.low()];
    let upper = [tc_bounds.high(), config.omega.high()];
    let mut best: Option<(OscParams, f64, bool)> = None;
    for start in &starts {
        let Some(out) = lm::minimize(
            |x| problem.residuals(x[0], x[1]),
            start,
            &lower,
            &upper,
            &opts,
        ) else {
            continue;
        };
        let Some((params, s)) = problem.solve(out.x[0], out.x[1]) else {
            continue;
        };
        let replace = match &best {
            None => true,
            Some((b, bs, _)) => better(s, params.tc, params.omega, (*bs, b.tc, b.omega)),
        };
        if replace {
            best = Some((params, s, out.converged));
        }
    }
    let (params, sse_best, converged) = match best {
        Some(b) => b,
        None => {
            let [tc, w] = node(ranked[0]);
            let (p, s) = problem.solve(tc, w).ok_or(Error::Degenerate)?;
            (p, s, false)
        }
    };
    Ok(OscFit {
        params,
        sse: sse_best,
        converged,
        degenerate: params.c == 0.0,
        candidates_evaluated: sse.len() + starts.len(),
    })
}

struct OscProblem<'a> {
    times: &'a [f64],
    values: &'a [f64],
    end: f64,
}

impl OscProblem<'_> {
    fn basis(&self, tc: f64, omega: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        if !(tc > self.end) {
            return None;
        }
        Some(
            self.times
                .iter()
                .map(|&t| {
                    let (s, c) = (omega * (tc - t).ln()).sin_cos();
                    (c, s)
                })
                .unzip(),
        )
    }

    fn solve(&self, tc: f64, omega: f64) -> Option<(OscParams, f64)> {
        let (cos, sin) = self.basis(tc, omega)?;
        let sol = lstsq(&[&cos, &sin], self.values)?;
        let (c1, c2) = (sol.coef[0], sol.coef[1]);
        let c = c1.hypot(c2);
        let phi = if c == 0.0 { 0.0 } else { (-c2).atan2(c1) };
        Some((OscParams { c, omega, phi, tc }, sol.sse))
    }

    fn residuals(&self, tc: f64, omega: f64) -> Option<Vec<f64>> {
        let (cos, sin) = self.basis(tc, omega)?;
        let sol = lstsq(&[&cos, &sin], self.values)?;
        Some(
            (0..self.values.len())
                .map(|i| sol.coef[0] * cos[i] + sol.coef[1] * sin[i] - self.values[i])
                .collect(),
        )
    }
}

/// Two-step hyperbolic fit: the trend first, then log-periodic oscillation
/// on the price-space deviations from it. Every point has equal weight.
pub fn fit_hyper_osc(
    series: &PriceSeries,
    window: &Window,
    config: &FitConfig,
) -> Result<FitResult> {
    let trend = fit_hyper_trend(series, window, config)?;
    let ModelParams::HyperOsc(trend_params) = trend.params else {
        unreachable!("trend fit returns hyperbolic parameters");
    };
    let sub = series.slice(trend.window.start, trend.window.end)?;
    let points = sub
        .observations()
        .iter()
        .map(|o| {
            let t = o.time();
            Ok((t, o.price - trend_params.trend(t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let osc = fit_osc_residuals(&points, config)?;
    let params = trend_params.with_oscillation(osc.params);
    let model = ModelParams::HyperOsc(params);
    let resid = crate::model::residuals(&model, &sub, &trend.window)?;
    Ok(FitResult {
        params: model,
        sse: lm::sum_sq(&resid),
        n_points: points.len(),
        converged: trend.converged && osc.converged,
        candidates_evaluated: trend.candidates_evaluated + osc.candidates_evaluated,
        window: trend.window,
    })
}
