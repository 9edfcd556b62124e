//! Box-constrained Levenberg-Marquardt over a handful of nonlinear
//! parameters with a finite-difference Jacobian.
//!
//! The residual closure is expected to profile out any linear parameters
//! itself, so the solver only ever sees the nonlinear ones. A closure
//! returning `None` marks the point infeasible and the step is rejected.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::solve_spd;

/// Finite-difference step as a fraction of each parameter's bound width.
const FD_STEP: f64 = 1e-7;
const LAMBDA_INIT: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e14;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step improves SSE by less than this fraction.
    pub tolerance: f64,
    /// SSE at or below this is treated as an exact fit.
    pub sse_floor: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub x: Vec<f64>,
    pub converged: bool,
}

pub(crate) fn minimize<F>(
    mut residuals: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: &LmOptions,
) -> Option<LmOutcome>
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let k = x0.len();
    let mut x: Vec<f64> = (0..k).map(|j| x0[j].clamp(lower[j], upper[j])).collect();
    let mut r = residuals(&x)?;
    let mut sse = sum_sq(&r);
    let mut lambda = LAMBDA_INIT;

    for _ in 0..opts.max_iterations {
        if sse <= opts.sse_floor {
            return Some(LmOutcome { x, converged: true });
        }
        let jac = jacobian(&mut residuals, &x, &r, lower, upper);
        let n = r.len();
        let mut jtj = vec![0.0; k * k];
        let mut grad = vec![0.0; k];
        for a in 0..k {
            let ja = &jac[a * n..(a + 1) * n];
            grad[a] = dot(ja, &r);
            for b in 0..=a {
                let v = dot(ja, &jac[b * n..(b + 1) * n]);
                jtj[a * k + b] = v;
                jtj[b * k + a] = v;
            }
        }

        // Freeze coordinates pinned at a bound by a gradient pointing outward,
        // and coordinates the residuals do not depend on.
        let free: Vec<usize> = (0..k)
            .filter(|&j| {
                let at_lower = x[j] <= lower[j] && grad[j] > 0.0;
                let at_upper = x[j] >= upper[j] && grad[j] < 0.0;
                jtj[j * k + j] > 0.0 && !at_lower && !at_upper
            })
            .collect();
        if free.is_empty() {
            return Some(LmOutcome { x, converged: true });
        }
        let kf = free.len();

        loop {
            let mut m = vec![0.0; kf * kf];
            for (a, &ia) in free.iter().enumerate() {
                for (b, &ib) in free.iter().enumerate() {
                    m[a * kf + b] = jtj[ia * k + ib];
                }
                m[a * kf + a] *= 1.0 + lambda;
            }
            let rhs: Vec<f64> = free.iter().map(|&j| -grad[j]).collect();
            let step = solve_spd(&m, &rhs);
            let mut candidate = x.clone();
            if let Some(step) = &step {
                for (&j, d) in free.iter().zip(step) {
                    candidate[j] = (x[j] + d).clamp(lower[j], upper[j]);
                }
            }
            let trial = step
                .as_ref()
                .filter(|_| candidate != x)
                .and_then(|_| residuals(&candidate))
                .map(|rn| {
                    let s = sum_sq(&rn);
                    (rn, s)
                })
                .filter(|(_, s)| s.is_finite() && *s < sse);

            match trial {
                Some((rn, sn)) => {
                    let improvement = (sse - sn) / sse;
                    x = candidate;
                    r = rn;
                    sse = sn;
                    lambda = (lambda / 3.0).max(1e-12);
                    if improvement < opts.tolerance {
                        return Some(LmOutcome { x, converged: true });
                    }
                    break;
                }
                None => {
                    lambda *= 4.0;
                    if lambda > LAMBDA_MAX {
                        // No descent left at this resolution.
                        return Some(LmOutcome { x, converged: true });
                    }
                }
            }
        }
    }
    Some(LmOutcome {
        x,
        converged: false,
    })
}

/// Column-major `n x k` Jacobian, central differences where the box allows.
fn jacobian<F>(residuals: &mut F, x: &[f64], r0: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64>
where
    F: FnMut(&[f64]) -> Option<Vec<f64>>,
{
    let k = x.len();
    let n = r0.len();
    let mut jac = vec![0.0; n * k];
    let mut probe = x.to_vec();
    for j in 0..k {
        let h = FD_STEP * (upper[j] - lower[j]).max(x[j].abs() * 1e-3);
        let mut eval = |v: f64, probe: &mut Vec<f64>| {
            probe[j] = v;
            let out = residuals(probe);
            probe[j] = x[j];
            out
        };
        let up = (x[j] + h <= upper[j])
            .then(|| eval(x[j] + h, &mut probe))
            .flatten();
        let down = (x[j] - h >= lower[j])
            .then(|| eval(x[j] - h, &mut probe))
            .flatten();
        let col = &mut jac[j * n..(j + 1) * n];
        match (up, down) {
            (Some(u), Some(d)) => {
                for i in 0..n {
                    col[i] = (u[i] - d[i]) / (2.0 * h);
                }
            }
            (Some(u), None) => {
                for i in 0..n {
                    col[i] = (u[i] - r0[i]) / h;
                }
            }
            (None, Some(d)) => {
                for i in 0..n {
                    col[i] = (r0[i] - d[i]) / h;
                }
            }
            // Column stays zero and the coordinate is frozen this iteration.
            (None, None) => {}
        }
    }
    jac
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}
