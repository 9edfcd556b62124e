//! Small dense least-squares kernels.
//!
//! Problems here are tall and thin (thousands of rows, at most four
//! columns), so a column-major Householder QR and a tiny Cholesky cover
//! everything the fitters need.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

/// Columns whose QR pivot falls below this fraction of the largest column
/// norm are treated as linearly dependent.
const RANK_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub coef: Vec<f64>,
    pub sse: f64,
}

/// Solve `min ||X b - y||` for the design matrix given as columns.
///
/// Returns `None` when the columns are rank deficient.
pub fn lstsq(columns: &[&[f64]], y: &[f64]) -> Option<LstsqSolution> {
    let n = y.len();
    let k = columns.len();
    if k == 0 || n < k || columns.iter().any(|c| c.len() != n) {
        return None;
    }
    let mut a: Vec<f64> = columns.iter().flat_map(|c| c.iter().copied()).collect();
    let mut rhs = y.to_vec();
    let col_norm_max = (0..k)
        .map(|j| norm(&a[j * n..(j + 1) * n]))
        .fold(0.0, f64::max);
    if !(col_norm_max.is_finite() && col_norm_max > 0.0) {
        return None;
    }

    let mut diag = vec![0.0; k];
    for j in 0..k {
        let col = &mut a[j * n..(j + 1) * n];
        let sigma = norm(&col[j..]);
        if sigma <= RANK_TOLERANCE * col_norm_max {
            return None;
        }
        let alpha = if col[j] > 0.0 { -sigma } else { sigma };
        col[j] -= alpha;
        let vnorm2: f64 = col[j..].iter().map(|v| v * v).sum();
        diag[j] = alpha;
        // Apply H = I - 2 v v^T / (v^T v) to the remaining columns and rhs.
        let (head, tail) = a.split_at_mut((j + 1) * n);
        let v = &head[j * n + j..(j + 1) * n];
        for c in tail.chunks_mut(n) {
            reflect(v, vnorm2, &mut c[j..]);
        }
        reflect(v, vnorm2, &mut rhs[j..]);
    }

    let mut coef = vec![0.0; k];
    for j in (0..k).rev() {
        let mut acc = rhs[j];
        for (i, c) in coef.iter().enumerate().skip(j + 1) {
            acc -= a[i * n + j] * c;
        }
        coef[j] = acc / diag[j];
    }
    let sse = rhs[k..].iter().map(|r| r * r).sum();
    Some(LstsqSolution { coef, sse })
}

fn reflect(v: &[f64], vnorm2: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let s = 2.0 * dot / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

fn norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * sum.sqrt()
}

/// Solve the symmetric positive-definite system `m x = b` in place.
///
/// `m` is row-major `k x k`. The system is equilibrated by its diagonal
/// first; `None` on a non-positive pivot.
pub fn solve_spd(m: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let k = b.len();
    debug_assert_eq!(m.len(), k * k);
    let scale: Vec<f64> = (0..k)
        .map(|i| {
            let d = m[i * k + i];
            if d > 0.0 && d.is_finite() {
                Some(1.0 / d.sqrt())
            } else {
                None
            }
        })
        .collect::<Option<_>>()?;
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = m[i * k + j] * scale[i] * scale[j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if s <= RANK_TOLERANCE {
                    return None;
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    let mut x: Vec<f64> = b.iter().zip(&scale).map(|(bi, si)| bi * si).collect();
    for i in 0..k {
        for p in 0..i {
            x[i] -= l[i * k + p] * x[p];
        }
        x[i] /= l[i * k + i];
    }
    for i in (0..k).rev() {
        for p in i + 1..k {
            x[i] -= l[p * k + i] * x[p];
        }
        x[i] /= l[i * k + i];
    }
    Some(x.iter().zip(&scale).map(|(xi, si)| xi * si).collect())
}
