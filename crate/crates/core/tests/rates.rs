mod common;

use common::{exps, graded, rel_err};
use fade_core::functionals::SandwichBounds;
use fade_core::grid::RadialField;
use fade_core::profiles::barenblatt_profile;
use fade_core::rates::*;
use fade_core::solver::{prepare_initial, simulate, InitialData, SolverConfig};
use fade_core::spectral::{rayleigh_gap, spectral_report};
use fade_core::FadeError;

#[test]
fn predicted_rates_subcritical() {
    let e = exps(0.2, 5);
    let spec = rayleigh_gap(&e, 1.0, &fade_core::spectral::default_spectral_grid(5, 1).unwrap()).unwrap();
    let b = SandwichBounds::from_quotient_bounds(1.0, 1.0, 1.0, &e).unwrap();
    let p = predict_rates(&e, &spec, &b).unwrap();
    assert!((p.lambda - 0.025).abs() < 1e-16);
    assert!((p.rate_f - 0.05).abs() < 1e-16);
    assert!(rel_err(p.rate_cj(0), 0.05 / 7.0) < 1e-14);
    assert!(p.rate_cj(100_000) < 1e-4 * p.rate_cj(0));
    assert_eq!(p.rate_relerr(2.5), 0.0);
}

#[test]
fn exact_exponential_fit() {
    let series: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 3.0 * (-0.7 * k as f64).exp())).collect();
    let fit = fit_exponential(&series, (0.0, 9.0)).unwrap();
    assert!((fit.slope + 0.7).abs() < 1e-12);
    let flat: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 2.0)).collect();
    assert!(fit_exponential(&flat, (0.0, 9.0)).unwrap().slope.abs() < 1e-15);
    assert!(matches!(fit_exponential(&series[..3], (0.0, 9.0)), Err(FadeError::InsufficientData(_))));
}

#[test]
fn small_perturbation_rate_and_envelope() {
    let e = exps(0.5, 3);
    let spec = spectral_report(&e, 1).unwrap();
    let grid = graded(3, 1e10, 3000);
    let data = prepare_initial(InitialData::Bump { amplitude: 1e-2, center: 1.0, width: 0.5 }, &e, grid, None).unwrap();
    let cfg = SolverConfig { dt: 0.1, t_end: 40.0, diag_every: 5, ..Default::default() };
    let tr = simulate(&data.w0, &data.bounds, &e, &cfg).unwrap();
    let fit = fit_exponential(&entropy_series(&tr), default_fit_window(&tr).unwrap()).unwrap();
    assert!(rel_err(-fit.slope, 2.0 * spec.lambda_est) <= 0.15, "{}", fit.slope);
    let env = sharp_rate_envelope(&tr, &e, &spec).unwrap();
    assert!(env.worst_pair(1e-3) <= 0.0);
    assert!(env.all_certified());
    let tail = &env.gamma[env.gamma.len() / 2..];
    assert!(tail.windows(2).all(|g| g[1] >= g[0] - 1e-12));
    assert!(*env.gamma.last().unwrap() <= 2.0 * spec.lambda_est);
}

#[test]
fn tight_sandwich_gives_twice_the_gap() {
    let e = exps(0.5, 3);
    let spec = spectral_report(&e, 1).unwrap();
    let b = SandwichBounds::from_quotient_bounds(1.0, 1.0, 1.0, &e).unwrap();
    let p = predict_rates(&e, &spec, &b).unwrap();
    assert!(rel_err(p.gamma_nl.unwrap(), 2.0 * spec.lambda_est) < 1e-14);
    let wide = SandwichBounds::from_quotient_bounds(0.5, 2.0, 1.0, &e).unwrap();
    assert!(predict_rates(&e, &spec, &wide).unwrap().gamma_nl.is_none());
}

#[test]
fn moment_norm_cases() {
    let e = exps(0.5, 3);
    let grid = graded(3, 1e3, 1024);
    let b = SandwichBounds::from_quotient_bounds(0.9, 1.1, 1.0, &e).unwrap();
    let one = RadialField::constant(grid.clone(), 1.0);
    assert_eq!(moment_norm(&one, &b, &e, 0.5).unwrap().norm, 0.0);

    let w = RadialField::from_fn(grid, |r| 1.0 + 0.05 * (-(r - 1.0).powi(2)).exp() / (1.0 + r * r));
    let plain = moment_norm(&w, &b, &e, 0.0).unwrap();
    // |v - V| = |w - 1| V, theta = 0
    let oracle = common::radial_oracle(|r| {
        let x = 0.05 * (-(r - 1.0).powi(2)).exp() / (1.0 + r * r) * barenblatt_profile(&e, 1.0, r);
        x * x * 4.0 * std::f64::consts::PI * r * r
    })
    .sqrt();
    assert!(rel_err(plain.norm, oracle) < 1e-6, "{} {oracle}", plain.norm);
    assert!(plain.norm <= plain.bound);
}

#[test]
fn interpolation_inequality_sides() {
    let e = exps(0.5, 3);
    let zero = RadialField::constant(graded(3, 1e3, 256), 0.0);
    assert_eq!(interpolation_check(&zero, 0).unwrap(), (0.0, 0.0));
    let mut ratios = Vec::new();
    for n in [512, 1024, 2048] {
        let f = RadialField::from_fn(graded(3, 1e3, n), |r| barenblatt_profile(&e, 2.0, r) - barenblatt_profile(&e, 1.0, r));
        let (lhs, rhs) = interpolation_check(&f, 0).unwrap();
        ratios.push(lhs / rhs);
        let (l3, r3) = interpolation_check(&f.scale(-3.0), 0).unwrap();
        assert!(rel_err(l3 / r3, lhs / rhs) < 1e-12);
        let (l1, r1) = interpolation_check(&f, 1).unwrap();
        assert!(l1.is_finite() && r1 > 0.0);
    }
    assert!(ratios.iter().all(|x| rel_err(*x, ratios[2]) < 0.02), "{ratios:?}");
    assert!(interpolation_check(&zero, 2).is_err());
}
