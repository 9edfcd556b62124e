mod common;

use approx::assert_relative_eq;
use common::*;
use lppl_core::fit::{gradient_check, LpplProblem};
use lppl_core::linalg::lstsq;
use lppl_core::{
    fit_lppl, residuals, FitConfig, FitResult, LpplParams, ModelParams, Observation, PriceSeries,
    Space,
};

fn lppl(fit: &FitResult) -> LpplParams {
    match fit.params {
        ModelParams::Lppl(p) => p,
        ModelParams::HyperOsc(_) => panic!("expected an LPPL fit"),
    }
}

fn clean_case() -> (PriceSeries, LpplParams) {
    let (d, end) = dates(ymd(2005, 3, 1), 400);
    let truth = LpplParams {
        a: 300.0,
        m: 120.0,
        c: 0.05,
        alpha: 0.45,
        omega: 9.0,
        phi: 1.0,
        tc: end + 0.3,
        space: Space::Price,
    };
    (synth(truth, &d, 0.0, 0), truth)
}

#[test]
fn noise_free_recovery() {
    let (s, truth) = clean_case();
    let fit = fit_lppl(&s, &s.window(), &FitConfig::default()).unwrap();
    let p = lppl(&fit);
    let sum_sq: f64 = s.prices().iter().map(|v| v * v).sum();
    assert!(
        days(p.tc - truth.tc).abs() <= 2.0,
        "tc off by {} days",
        days(p.tc - truth.tc)
    );
    assert!(fit.sse < 1e-6 * sum_sq, "sse {} vs {}", fit.sse, sum_sq);
    assert!(fit.converged);
    assert_eq!(fit.n_points, 400);
    assert_eq!(fit.window, s.window());
}

#[test]
fn noisy_fits_dominate_the_generator() {
    let (d, end) = dates(ymd(2004, 1, 5), 600);
    let truth = gold_like(end, 0.4);
    for seed in 0..3 {
        let s = synth(truth, &d, 0.01, seed);
        let fit = fit_lppl(&s, &s.window(), &FitConfig::default()).unwrap();
        let true_sse = sse(&residuals(&truth.into(), &s, &s.window()).unwrap());
        assert!(
            fit.sse <= true_sse,
            "seed {seed}: {} > {}",
            fit.sse,
            true_sse
        );
    }
}

#[test]
fn log_space_dominates_the_generator() {
    let (d, end) = dates(ymd(2006, 1, 2), 400);
    let truth = LpplParams {
        a: 7.2,
        m: 0.6,
        c: 0.08,
        alpha: 0.5,
        omega: 11.0,
        phi: -2.0,
        tc: end + 0.25,
        space: Space::LogPrice,
    };
    let s = synth(truth, &d, 0.005, 11);
    let config = FitConfig {
        space: Space::LogPrice,
        ..FitConfig::default()
    };
    let fit = fit_lppl(&s, &s.window(), &config).unwrap();
    let true_sse = sse(&residuals(&truth.into(), &s, &s.window()).unwrap());
    assert!(fit.sse <= true_sse);
    assert_eq!(lppl(&fit).space, Space::LogPrice);
    assert!(gradient_check(&s, &config, &fit).unwrap().passed());
}

#[test]
fn refinement_never_worse_than_grid() {
    let (d, end) = dates(ymd(2004, 1, 5), 300);
    let s = synth(gold_like(end, 0.3), &d, 0.02, 5);
    let config = FitConfig::default();
    let fit = fit_lppl(&s, &s.window(), &config).unwrap();
    let problem = LpplProblem::new(&s, &s.window(), config.space).unwrap();
    let [tcs, alphas, omegas] = config.lppl_grid(problem.end_time());
    let mut best_grid = f64::INFINITY;
    for &tc in &tcs {
        for &a in &alphas {
            for &w in &omegas {
                if let Some(pr) = problem.profile(tc, a, w) {
                    best_grid = best_grid.min(pr.sse);
                }
            }
        }
    }
    assert!(fit.sse <= best_grid, "{} > {}", fit.sse, best_grid);
    assert_eq!(
        fit.candidates_evaluated,
        tcs.len() * alphas.len() * omegas.len() + config.multistart
    );
}

#[test]
fn linear_parameters_reproduce_coefficients() {
    let (d, end) = dates(ymd(2004, 1, 5), 300);
    let s = synth(gold_like(end, 0.3), &d, 0.01, 2);
    let fit = fit_lppl(&s, &s.window(), &FitConfig::default()).unwrap();
    let p = lppl(&fit);
    let t = s.times();
    let y = s.prices();
    let ones = vec![1.0; t.len()];
    let f: Vec<f64> = t.iter().map(|ti| (p.tc - ti).powf(p.alpha)).collect();
    let lw: Vec<f64> = t.iter().map(|ti| p.omega * (p.tc - ti).ln()).collect();
    let fc: Vec<f64> = f.iter().zip(&lw).map(|(a, b)| a * b.cos()).collect();
    let fs: Vec<f64> = f.iter().zip(&lw).map(|(a, b)| a * b.sin()).collect();
    let direct = lstsq(&[&ones, &f, &fc, &fs], &y).unwrap();
    let recovered = p.linear_coefficients();
    for (k, (got, want)) in recovered.iter().zip(&direct.coef).enumerate() {
        let scale = want.abs().max(1.0);
        assert!(
            (got - want).abs() <= 1e-9 * scale,
            "coefficient {k}: {got} vs {want}"
        );
    }
    let back = LpplParams::from_linear(recovered, p.tc, p.alpha, p.omega, p.space).unwrap();
    assert_relative_eq!(back.a, p.a, max_relative = 1e-12);
    assert_relative_eq!(back.m, p.m, max_relative = 1e-12);
    assert_relative_eq!(back.c, p.c, max_relative = 1e-9);
}

#[test]
fn price_scale_equivariance() {
    let (d, end) = dates(ymd(2004, 1, 5), 300);
    let s = synth(gold_like(end, 0.3), &d, 0.01, 8);
    let k = 3.7;
    let scaled = PriceSeries::new(
        s.observations()
            .iter()
            .map(|o| Observation::new(o.date, o.price * k))
            .collect(),
        s.basis(),
    )
    .unwrap();
    let config = FitConfig::default();
    let f1 = fit_lppl(&s, &s.window(), &config).unwrap();
    let f2 = fit_lppl(&scaled, &scaled.window(), &config).unwrap();
    let (p1, p2) = (lppl(&f1), lppl(&f2));
    assert_relative_eq!(p2.a, k * p1.a, max_relative = 1e-6);
    assert_relative_eq!(p2.m, k * p1.m, max_relative = 1e-6);
    assert_relative_eq!(f2.sse, k * k * f1.sse, max_relative = 1e-6);
    assert!(days(p2.tc - p1.tc).abs() < 1e-3);
    assert_relative_eq!(p2.alpha, p1.alpha, max_relative = 1e-5);
    assert_relative_eq!(p2.omega, p1.omega, max_relative = 1e-5);
    assert_relative_eq!(p2.c, p1.c, max_relative = 1e-5);
    let dphi = lppl_core::model::normalize_phase(p2.phi - p1.phi);
    assert!(dphi.abs() < 1e-5);
}

#[test]
fn fits_are_deterministic() {
    let (d, end) = dates(ymd(2004, 1, 5), 250);
    let s = synth(gold_like(end, 0.3), &d, 0.01, 3);
    let config = FitConfig::default();
    let a = fit_lppl(&s, &s.window(), &config).unwrap();
    let b = fit_lppl(&s, &s.window(), &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.sse.to_bits(), b.sse.to_bits());
}

#[test]
fn returned_optima_are_stationary() {
    let config = FitConfig::default();
    let (s, _) = clean_case();
    let fit = fit_lppl(&s, &s.window(), &config).unwrap();
    let g = gradient_check(&s, &config, &fit).unwrap();
    assert!(g.passed(), "{g:?}");

    let (d, end) = dates(ymd(2004, 1, 5), 500);
    for seed in 0..2 {
        let s = synth(gold_like(end, 0.5), &d, 0.01, seed);
        let fit = fit_lppl(&s, &s.window(), &config).unwrap();
        let g = gradient_check(&s, &config, &fit).unwrap();
        assert!(g.passed(), "seed {seed}: {g:?}");
    }
}

#[test]
fn sub_window_uses_only_its_data() {
    let (s, _) = clean_case();
    let dates: Vec<_> = s.dates().collect();
    let window = lppl_core::Window::new(dates[20], dates[300]).unwrap();
    let fit = fit_lppl(&s, &window, &FitConfig::default()).unwrap();
    assert_eq!(fit.n_points, 281);
    assert_eq!(fit.window, window);
    assert!(lppl(&fit).tc > lppl_core::to_decimal_year(dates[300]).value());
}
