mod common;

use std::f64::consts::PI;

use common::{exps, graded, rel_err};
use fade_core::grid::{integrate, radial_gradient, sphere_area, RadialField};
use fade_core::profiles::{barenblatt_profile, barenblatt_profile_derivative};
use fade_core::FadeError;

#[test]
fn sphere_area_values() {
    assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
    assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
}

#[test]
fn integral_of_profile_is_two_root_two_pi_squared() {
    // V_1 = (1 + r^2/2)^{-2} for m = 1/2; int V_1 dx = 2 sqrt(2) pi^2
    let e = exps(0.5, 3);
    let exact = 2.0 * 2f64.sqrt() * PI * PI;
    let oracle = common::radial_oracle(|r| barenblatt_profile(&e, 1.0, r) * 4.0 * PI * r * r);
    assert!(rel_err(oracle, exact) < 1e-12);
    let f = RadialField::from_fn(graded(3, 1e4, 4096), |r| barenblatt_profile(&e, 1.0, r));
    let q = integrate(&f, 0.0).unwrap();
    assert!(rel_err(q.value, exact) < 1e-6, "{}", q.value);
    assert!((q.value - exact).abs() <= q.error.max(1e-8 * exact));
}

#[test]
fn zero_integrand() {
    let f = RadialField::constant(graded(3, 1e3, 128), 0.0);
    assert_eq!(integrate(&f, 0.0).unwrap().value, 0.0);
}

#[test]
fn divergent_tail_is_reported() {
    let e = exps(0.2, 5);
    let f = RadialField::from_fn(graded(5, 1e4, 1024), |r| barenblatt_profile(&e, 1.0, r).powf(2.0 - 0.2));
    assert!(matches!(integrate(&f, 0.0), Err(FadeError::DivergentTail { .. })));
}

#[test]
fn gradient_exact_on_quadratics_and_constants() {
    let grid = graded(3, 50.0, 300);
    let g = radial_gradient(&RadialField::from_fn(grid.clone(), |r| r * r));
    for (&r, &x) in grid.nodes().iter().zip(g.values()) {
        assert!((x - 2.0 * r).abs() <= 1e-9 * (1.0 + r), "{r}: {x}");
    }
    let c = radial_gradient(&RadialField::constant(grid, 3.0));
    assert!(c.max_abs() < 1e-12, "{}", c.max_abs());
}

#[test]
fn gradient_of_profile_is_second_order() {
    let e = exps(0.5, 3);
    let mut errors = Vec::new();
    for n in [256, 512, 1024] {
        let grid = graded(3, 100.0, n);
        let g = radial_gradient(&RadialField::from_fn(grid.clone(), |r| barenblatt_profile(&e, 1.0, r)));
        let err = grid
            .nodes()
            .iter()
            .zip(g.values())
            .map(|(&r, &x)| (x - barenblatt_profile_derivative(&e, 1.0, r)).abs() / barenblatt_profile(&e, 1.0, r))
            .fold(0.0, f64::max);
        errors.push(err);
    }
    assert!(errors[0] / errors[1] > 3.5 && errors[1] / errors[2] > 3.5, "{errors:?}");
}
