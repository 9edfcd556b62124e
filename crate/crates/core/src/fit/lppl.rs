use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::{better, rank_grid, FitConfig, FitResult, Interval, WindowData};
use crate::error::{Error, Result};
use crate::linalg::{lstsq, solve_spd};
use crate::lm::{self, LmOptions};
use crate::model::{LpplParams, ModelParams, Space};
use crate::series::{PriceSeries, Window};

/// LPPL least-squares problem over one window with the four linear
/// parameters profiled out.
///
/// For fixed `(tc, alpha, omega)` the model is linear in the coefficients of
/// `[1, f, f cos(omega ln tau), f sin(omega ln tau)]` with `f = tau^alpha`.
pub struct LpplProblem {
    data: WindowData,
    space: Space,
    sum_sq: f64,
}

/// Best linear parameters for one nonlinear triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub params: LpplParams,
    pub sse: f64,
}

impl LpplProblem {
    pub fn new(series: &PriceSeries, window: &Window, space: Space) -> Result<Self> {
        let data = WindowData::new(series, window, space)?;
        let sum_sq = data.values.iter().map(|v| v * v).sum();
        Ok(Self {
            data,
            space,
            sum_sq,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.data.times
    }

    /// Observations in fit space (price or log-price).
    pub fn values(&self) -> &[f64] {
        &self.data.values
    }

    pub fn sum_sq_values(&self) -> f64 {
        self.sum_sq
    }

    pub fn end_time(&self) -> f64 {
        self.data.end_time
    }

    pub fn window(&self) -> Window {
        self.data.window
    }

    /// Profiled SSE at `(tc, alpha, omega)`; `None` when the point is
    /// infeasible (singularity inside the data, rank-deficient basis, or a
    /// relative amplitude `|C| >= 1`).
    pub fn profile(&self, tc: f64, alpha: f64, omega: f64) -> Option<Profile> {
        self.solve(tc, alpha, omega).map(|(params, resid)| Profile {
            params,
            sse: lm::sum_sq(&resid),
        })
    }

    fn solve(&self, tc: f64, alpha: f64, omega: f64) -> Option<(LpplParams, Vec<f64>)> {
        if !(tc > self.data.end_time) || !alpha.is_finite() || !omega.is_finite() {
            return None;
        }
        let n = self.data.times.len();
        let ones = vec![1.0; n];
        let mut f = Vec::with_capacity(n);
        let mut fc = Vec::with_capacity(n);
        let mut fs = Vec::with_capacity(n);
        for &t in &self.data.times {
            let ln_tau = (tc - t).ln();
            let p = (alpha * ln_tau).exp();
            let (s, c) = (omega * ln_tau).sin_cos();
            f.push(p);
            fc.push(p * c);
            fs.push(p * s);
        }
        let sol = lstsq(&[&ones, &f, &fc, &fs], &self.data.values)?;
        let coef = [sol.coef[0], sol.coef[1], sol.coef[2], sol.coef[3]];
        let params = LpplParams::from_linear(coef, tc, alpha, omega, self.space)?;
        if !(params.c < 1.0) {
            return None;
        }
        let resid = (0..n)
            .map(|i| {
                coef[0] + coef[1] * f[i] + coef[2] * fc[i] + coef[3] * fs[i] - self.data.values[i]
            })
            .collect();
        Some((params, resid))
    }

    fn residual_vector(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.solve(x[0], x[1], x[2]).map(|(_, r)| r)
    }
}

/// Fit the LPPL model over `window`.
pub fn fit_lppl(series: &PriceSeries, window: &Window, config: &FitConfig) -> Result<FitResult> {
    fit_lppl_from(series, window, config, None)
}

/// As [`fit_lppl`], with an extra refinement start `(tc, alpha, omega)`,
/// typically the optimum of a neighbouring window. The grid search runs
/// regardless.
pub fn fit_lppl_from(
    series: &PriceSeries,
    window: &Window,
    config: &FitConfig,
    warm_start: Option<[f64; 3]>,
) -> Result<FitResult> {
    config.validate()?;
    let problem = LpplProblem::new(series, window, config.space)?;
    let end = problem.end_time();

    let tc_bounds = Interval(end + config.tc_offset.low(), end + config.tc_offset.high());
    let [tcs, alphas, omegas] = config.lppl_grid(end);

    let sse = grid_sse(&problem, &tcs, &alphas, &omegas);
    let dims = [tcs.len(), alphas.len(), omegas.len()];
    let ranked = rank_grid(&sse, &dims);
    if ranked.is_empty() {
        return Err(Error::Degenerate);
    }
    let node = |idx: usize| {
        let io = idx % dims[2];
        let ia = (idx / dims[2]) % dims[1];
        let it = idx / (dims[1] * dims[2]);
        [tcs[it], alphas[ia], omegas[io]]
    };
    let mut starts: Vec<[f64; 3]> = ranked
        .iter()
        .take(config.multistart)
        .map(|&i| node(i))
        .collect();
    if let Some(ws) = warm_start {
        if !starts.contains(&ws) {
            starts.push(ws);
        }
    }

    let opts = LmOptions {
        max_iterations: config.max_iterations,
        tolerance: config.tolerance,
        sse_floor: 1e-28 * problem.sum_sq_values(),
    };
    let mut best: Option<(Profile, bool)> = None;
    for start in &starts {
        let alpha_bounds = if start[1] < 0.0 {
            Interval(-config.alpha.high(), -config.alpha.low())
        } else {
            config.alpha
        };
        let lower = [tc_bounds.low(), alpha_bounds.low(), config.omega.low()];
        let upper = [tc_bounds.high(), alpha_bounds.high(), config.omega.high()];
        let Some(out) = lm::minimize(|x| problem.residual_vector(x), start, &lower, &upper, &opts)
        else {
            continue;
        };
        let Some(profile) = problem.profile(out.x[0], out.x[1], out.x[2]) else {
            continue;
        };
        let replace = match &best {
            None => true,
            Some((b, _)) => better(
                profile.sse,
                profile.params.tc,
                profile.params.omega,
                (b.sse, b.params.tc, b.params.omega),
            ),
        };
        if replace {
            best = Some((profile, out.converged));
        }
    }

    let (profile, converged) = match best {
        Some(b) => b,
        // Every refinement failed; fall back to the best grid node.
        None => {
            let [tc, alpha, omega] = node(ranked[0]);
            (
                problem.profile(tc, alpha, omega).ok_or(Error::Degenerate)?,
                false,
            )
        }
    };
    Ok(FitResult {
        params: ModelParams::Lppl(profile.params),
        sse: profile.sse,
        n_points: problem.times().len(),
        converged,
        candidates_evaluated: sse.len() + starts.len(),
        window: problem.window(),
    })
}

/// Finite-difference stationarity of an LPPL optimum, see
/// [`GRADIENT_RTOL`](super::GRADIENT_RTOL).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    /// Norm of the width-scaled projected gradient of SSE.
    pub norm: f64,
    pub threshold: f64,
}

impl GradientCheck {
    pub fn passed(&self) -> bool {
        self.norm <= self.threshold
    }
}

/// Central-difference gradient of the profiled SSE at `result`'s nonlinear
/// parameters, over the same window and search box the fit used.
/// Components pushing outward at an active bound are dropped.
pub fn gradient_check(
    series: &PriceSeries,
    config: &FitConfig,
    result: &FitResult,
) -> Result<GradientCheck> {
    let ModelParams::Lppl(p) = result.params else {
        return Err(Error::InvalidConfig(
            "gradient check needs an LPPL fit".into(),
        ));
    };
    let problem = LpplProblem::new(series, &result.window, config.space)?;
    let end = problem.end_time();
    let alpha = if p.alpha < 0.0 {
        Interval(-config.alpha.high(), -config.alpha.low())
    } else {
        config.alpha
    };
    let boxes = [
        Interval(end + config.tc_offset.low(), end + config.tc_offset.high()),
        alpha,
        config.omega,
    ];
    let x = [p.tc, p.alpha, p.omega];
    let sse_at = |x: &[f64; 3]| problem.profile(x[0], x[1], x[2]).map(|pr| pr.sse);
    let centre = sse_at(&x).ok_or(Error::Degenerate)?;

    let mut norm_sq = 0.0;
    for j in 0..3 {
        let h = 1e-6 * boxes[j].width();
        let mut up = x;
        let mut down = x;
        up[j] = (x[j] + h).min(boxes[j].high());
        down[j] = (x[j] - h).max(boxes[j].low());
        let (su, sd) = (sse_at(&up), sse_at(&down));
        let g = match (su, sd) {
            (Some(u), Some(d)) if up[j] > down[j] => (u - d) / (up[j] - down[j]),
            (Some(u), _) if up[j] > x[j] => (u - centre) / (up[j] - x[j]),
            (_, Some(d)) if down[j] < x[j] => (centre - d) / (x[j] - down[j]),
            _ => 0.0,
        };
        let outward = (x[j] <= boxes[j].low() && g > 0.0) || (x[j] >= boxes[j].high() && g < 0.0);
        if !outward {
            norm_sq += (g * boxes[j].width()).powi(2);
        }
    }
    Ok(GradientCheck {
        norm: norm_sq.sqrt(),
        threshold: super::GRADIENT_RTOL * centre + super::GRADIENT_ATOL * problem.sum_sq_values(),
    })
}

/// Profiled SSE at every grid node, row-major over `(tc, alpha, omega)`.
/// Infeasible nodes are NaN.
///
/// Uses accumulated normal equations on centred values; good enough to rank
/// nodes, while refinement re-solves with QR.
fn grid_sse(problem: &LpplProblem, tcs: &[f64], alphas: &[f64], omegas: &[f64]) -> Vec<f64> {
    let times = problem.times();
    let values = problem.values();
    let n = times.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let y: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let yy: f64 = y.iter().map(|v| v * v).sum();

    let mut out = vec![f64::NAN; tcs.len() * alphas.len() * omegas.len()];
    let mut ln_tau = vec![0.0; n];
    let mut pow = vec![0.0; n * alphas.len()];
    let mut cos = vec![0.0; n];
    let mut sin = vec![0.0; n];
    for (it, &tc) in tcs.iter().enumerate() {
        for (l, &t) in ln_tau.iter_mut().zip(times) {
            *l = (tc - t).ln();
        }
        for (ia, &alpha) in alphas.iter().enumerate() {
            for (p, &l) in pow[ia * n..(ia + 1) * n].iter_mut().zip(&ln_tau) {
                *p = (alpha * l).exp();
            }
        }
        for (io, &omega) in omegas.iter().enumerate() {
            for i in 0..n {
                let (s, c) = (omega * ln_tau[i]).sin_cos();
                cos[i] = c;
                sin[i] = s;
            }
            for ia in 0..alphas.len() {
                let f = &pow[ia * n..(ia + 1) * n];
                // Upper triangle of X^T X for columns [1, f, fc, fs], and X^T y.
                let mut g = [0.0f64; 10];
                let mut r = [0.0f64; 4];
                for i in 0..n {
                    let fi = f[i];
                    let fc = fi * cos[i];
                    let fs = fi * sin[i];
                    g[0] += fi;
                    g[1] += fc;
                    g[2] += fs;
                    g[3] += fi * fi;
                    g[4] += fi * fc;
                    g[5] += fi * fs;
                    g[6] += fc * fc;
                    g[7] += fc * fs;
                    g[8] += fs * fs;
                    r[1] += fi * y[i];
                    r[2] += fc * y[i];
                    r[3] += fs * y[i];
                }
                let nn = n as f64;
                let m = [
                    nn, g[0], g[1], g[2], //
                    g[0], g[3], g[4], g[5], //
                    g[1], g[4], g[6], g[7], //
                    g[2], g[5], g[7], g[8],
                ];
                let Some(beta) = solve_spd(&m, &r) else {
                    continue;
                };
                let b = beta[1];
                if b == 0.0 || beta[2].hypot(beta[3]) >= b.abs() {
                    continue;
                }
                let fitted: f64 = beta.iter().zip(&r).map(|(x, y)| x * y).sum();
                let idx = (it * alphas.len() + ia) * omegas.len() + io;
                out[idx] = (yy - fitted).max(0.0);
            }
        }
    }
    out
}
