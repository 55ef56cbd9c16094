mod common;

use common::{exps, graded};
use fade_core::functionals::SandwichBounds;
use fade_core::grid::RadialField;
use fade_core::solver::*;
use fade_core::FadeError;

fn mixture_run(n: usize, dt: f64, t_end: f64) -> (Trajectory, PreparedData) {
    let e = exps(0.5, 3);
    let data = prepare_initial(InitialData::Mixture { d0: 2.0, d1: 0.5, weight: 0.5 }, &e, graded(3, 1e3, n), None)
        .unwrap();
    let cfg = SolverConfig { dt, t_end, diag_every: (0.5 / dt).round() as usize, ..Default::default() };
    (simulate(&data.w0, &data.bounds, &e, &cfg).unwrap(), data)
}

#[test]
fn equilibrium_is_an_exact_steady_state() {
    let e = exps(0.45, 4);
    let data = prepare_initial(InitialData::Equilibrium, &e, graded(4, 1e3, 512), Some(1.3)).unwrap();
    let cfg = SolverConfig { dt: 0.05, t_end: 2.0, diag_every: 5, ..Default::default() };
    let tr = simulate(&data.w0, &data.bounds, &e, &cfg).unwrap();
    let drift = tr.fields.iter().map(|w| w.values().iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
    assert!(drift <= 1e-12);
    assert!(entropy_production_residual(&tr).iter().all(|&r| r == 0.0));
    assert_eq!(sandwich_check(&tr, &data.bounds), 0.0);
    assert_eq!(mass_drift(&tr, 1.3, &e).unwrap(), 0.0);
}

#[test]
fn profile_quotient_data_relaxes() {
    let (tr, data) = mixture_run(512, 0.01, 10.0);
    assert!(tr.reports.windows(2).all(|r| r[1].entropy < r[0].entropy));
    let dev = |w: &RadialField| w.values().iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    let first = dev(&tr.fields[0]);
    let last = dev(tr.fields.last().unwrap());
    assert!(last < 1e-2 * first, "{first} -> {last}");
    assert!(sandwich_check(&tr, &data.bounds) <= 1e-8);
    assert!(barrier_check(&tr) <= 1e-8);
}

#[test]
fn residual_decreases_under_refinement() {
    let mut worst = Vec::new();
    for (n, dt) in [(64, 0.032), (256, 0.008), (1024, 0.002)] {
        let (tr, _) = mixture_run(n, dt, 2.0);
        worst.push(entropy_production_residual(&tr).into_iter().fold(0.0, f64::max));
    }
    assert!(worst.windows(2).all(|w| w[1] < w[0]), "{worst:?}");
}

#[test]
fn violated_initial_data() {
    let e = exps(0.5, 3);
    let grid = graded(3, 1e3, 256);
    let bounds = SandwichBounds::from_quotient_bounds(0.9, 1.1, 1.0, &e).unwrap();
    let w0 = RadialField::from_fn(grid, |r| 1.0 + 0.5 * (-r * r).exp());
    assert!((bounds.violation(w0.values()) - 0.4).abs() < 1e-12);
    let cfg = SolverConfig { dt: 1e-3, t_end: 1e-2, diag_every: 1, ..Default::default() };
    assert!(matches!(simulate(&w0, &bounds, &e, &cfg), Err(FadeError::SandwichViolation { .. })));
}

#[test]
fn ordered_data_stay_ordered() {
    let e = exps(0.5, 3);
    let grid = graded(3, 1e3, 512);
    let cfg = SolverConfig { dt: 0.01, t_end: 5.0, diag_every: 50, ..Default::default() };
    let lower = prepare_initial(InitialData::Mixture { d0: 2.0, d1: 0.5, weight: 0.7 }, &e, grid.clone(), Some(1.0)).unwrap();
    let upper = prepare_initial(InitialData::Mixture { d0: 2.0, d1: 0.5, weight: 0.3 }, &e, grid, Some(1.0)).unwrap();
    let a = simulate(&lower.w0, &lower.bounds, &e, &cfg).unwrap();
    let b = simulate(&upper.w0, &upper.bounds, &e, &cfg).unwrap();
    let violation = a
        .fields
        .iter()
        .zip(&b.fields)
        .map(|(x, y)| x.zip_with(y, |p, q| (p - q).max(0.0)).max_abs())
        .fold(0.0, f64::max);
    assert!(violation <= 1e-10, "{violation}");
}

#[test]
fn mass_is_conserved() {
    let (tr, data) = mixture_run(1024, 0.005, 5.0);
    let m0 = tr.reports[0].rel_mass;
    assert!(discrete_mass_drift(&tr) <= 1e-6 * (1.0 + m0.abs()));
    assert!(mass_drift(&tr, data.bounds.dstar, &tr.exps).unwrap() < 1e-4);
}

#[test]
fn config_validation() {
    let bad = [
        SolverConfig { dt: 0.0, ..Default::default() },
        SolverConfig { t_end: -1.0, ..Default::default() },
        SolverConfig { theta: 0.3, ..Default::default() },
        SolverConfig { diag_every: 0, ..Default::default() },
    ];
    for c in bad {
        assert!(c.validate().is_err());
    }
    assert!(SolverConfig::default().validate().is_ok());
}
