//! Relative entropy, relative Fisher information, their linearizations, and
//! the comparison constants built from the sandwich bounds.

use crate::error::{FadeError, Result};
use crate::grid::{integrate, radial_gradient, RadialField};
use crate::profiles::{barenblatt_profile, profile_power_m_minus_1, Exponents};

/// Barrier parameters `D1 <= D* <= D0` and the derived quotient bounds `W0 <= 1 <= W1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichBounds {
    pub d0: f64,
    pub d1: f64,
    pub dstar: f64,
    pub w0: f64,
    pub w1: f64,
}

impl SandwichBounds {
    pub fn new(d0: f64, d1: f64, dstar: f64, exps: &Exponents) -> Result<Self> {
        if !(d1 > 0.0 && d1 <= dstar && dstar <= d0 && d0.is_finite()) {
            return Err(FadeError::domain(format!(
                "need 0 < D1 <= D* <= D0, got D1 = {d1}, D* = {dstar}, D0 = {d0}"
            )));
        }
        let k = 1.0 / (1.0 - exps.m);
        Ok(Self { d0, d1, dstar, w0: (dstar / d0).powf(k), w1: (dstar / d1).powf(k) })
    }

    /// Bounds specified through `W0 <= 1 <= W1` directly.
    pub fn from_quotient_bounds(w0: f64, w1: f64, dstar: f64, exps: &Exponents) -> Result<Self> {
        if !(w0 > 0.0 && w0 <= 1.0 && w1 >= 1.0 && w1.is_finite()) {
            return Err(FadeError::domain(format!("need 0 < W0 <= 1 <= W1, got {w0}, {w1}")));
        }
        let e = 1.0 - exps.m;
        Ok(Self { d0: dstar * w0.powf(-e), d1: dstar * w1.powf(-e), dstar, w0, w1 })
    }

    /// Tightest Barenblatt barriers `V_{D0} / V_{D*} <= w <= V_{D1} / V_{D*}` enclosing `w`.
    pub fn enclosing(w: &RadialField, dstar: f64, exps: &Exponents) -> Result<Self> {
        let e = 1.0 - exps.m;
        let c = exps.profile_coefficient();
        let (mut d0, mut d1) = (dstar, dstar);
        for (&r, &x) in w.grid().nodes().iter().zip(w.values()) {
            if !(x > 0.0) {
                return Err(FadeError::domain("quotient must be positive"));
            }
            let factor_m1 = (-e * (x - 1.0).ln_1p()).exp_m1();
            let dr = dstar * (1.0 + factor_m1) + c * r * r * factor_m1;
            d0 = d0.max(dr);
            d1 = d1.min(dr);
        }
        if !(d1 > 0.0) {
            return Err(FadeError::domain("quotient is not enclosed by any Barenblatt barrier"));
        }
        Self::new(d0, d1, dstar, exps)
    }

    /// Largest violation `max(W0 - w, w - W1, 0)` over the grid.
    pub fn violation(&self, w: &[f64]) -> f64 {
        w.iter().fold(0.0, |acc: f64, &x| acc.max(self.w0 - x).max(x - self.w1))
    }
}

/// A value together with its estimated absolute quadrature error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Diagnostics at one rescaled time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub t: f64,
    pub entropy: f64,
    pub fisher: f64,
    pub e_lin: f64,
    pub i_lin: f64,
    pub rel_mass: f64,
    pub w_min: f64,
    pub w_max: f64,
}

/// `w^{m-1} - 1` as a function of `u = w - 1`, without cancellation.
pub fn power_deviation(u: f64, m: f64) -> f64 {
    ((m - 1.0) * u.ln_1p()).exp_m1()
}

/// `psi(w) = [(w - 1) - (w^m - 1)/m] / (1 - m)` as a function of `u = w - 1`.
pub fn entropy_density(u: f64, m: f64) -> f64 {
    if u.abs() < 1e-3 {
        // -(1/(m(1-m))) sum_{k>=2} binom(m, k) u^k
        let mut term = m * (m - 1.0) / 2.0 * u * u;
        let mut sum = term;
        for k in 3..12 {
            term *= (m - (k as f64 - 1.0)) / k as f64 * u;
            sum += term;
        }
        -sum / (m * (1.0 - m))
    } else {
        (u - (m * u.ln_1p()).exp_m1() / m) / (1.0 - m)
    }
}

fn profile_field(grid_like: &RadialField, dstar: f64, exps: &Exponents) -> RadialField {
    grid_like.map_with_radius(|r, _| barenblatt_profile(exps, dstar, r))
}

fn estimate(q: crate::grid::Quadrature, factor: f64) -> Estimate {
    Estimate { value: factor * q.value, error: factor.abs() * q.error }
}

/// `F[w] = 1/(1-m) int [(w-1) - (w^m-1)/m] V_{D*}^m dx`.
pub fn relative_entropy(w: &RadialField, bounds: &SandwichBounds, exps: &Exponents) -> Result<Estimate> {
    let m = exps.m;
    let v = profile_field(w, bounds.dstar, exps);
    let integrand = w.zip_with(&v, |x, vv| entropy_density(x - 1.0, m) * vv.powf(m));
    Ok(estimate(integrate(&integrand, 0.0)?, 1.0))
}

/// `I[w] = m/(m-1)^2 int |grad[(w^{m-1}-1) V^{m-1}]|^2 w V dx`.
pub fn relative_fisher(w: &RadialField, bounds: &SandwichBounds, exps: &Exponents) -> Result<Estimate> {
    let m = exps.m;
    let q = w.map_with_radius(|r, x| {
        power_deviation(x - 1.0, m) * profile_power_m_minus_1(exps, bounds.dstar, r)
    });
    let dq = radial_gradient(&q);
    let v = profile_field(w, bounds.dstar, exps);
    let integrand = RadialField::new(
        w.grid().clone(),
        (0..w.values().len())
            .map(|i| dq.values()[i].powi(2) * w.values()[i] * v.values()[i])
            .collect(),
    )?;
    Ok(estimate(integrate(&integrand, 0.0)?, m / (m - 1.0).powi(2)))
}

/// The linearization variable `g = (w - 1) V_{D*}^{m-1}`.
pub fn linearization_variable(w: &RadialField, dstar: f64, exps: &Exponents) -> RadialField {
    w.map_with_radius(|r, x| (x - 1.0) * profile_power_m_minus_1(exps, dstar, r))
}

/// `1/2 int g^2 V_{D*}^{2-m} dx`.
pub fn linearized_entropy(g: &RadialField, dstar: f64, exps: &Exponents) -> Result<Estimate> {
    let m = exps.m;
    let integrand = g.map_with_radius(|r, x| x * x * barenblatt_profile(exps, dstar, r).powf(2.0 - m));
    Ok(estimate(integrate(&integrand, 0.0)?, 0.5))
}

/// `m int |grad g|^2 V_{D*} dx`.
pub fn linearized_fisher(g: &RadialField, dstar: f64, exps: &Exponents) -> Result<Estimate> {
    let dg = radial_gradient(g);
    let integrand = dg.map_with_radius(|r, x| x * x * barenblatt_profile(exps, dstar, r));
    Ok(estimate(integrate(&integrand, 0.0)?, exps.m))
}

/// `(1/2 W1^{m-2} Q, 1/2 W0^{m-2} Q)` with `Q = int |w-1|^2 V^m dx`.
pub fn entropy_equivalence_bounds(
    w: &RadialField,
    bounds: &SandwichBounds,
    exps: &Exponents,
) -> Result<(Estimate, Estimate)> {
    let tol = 1e-12;
    let (lo, hi) = (w.min(), w.max());
    if lo < bounds.w0 - tol || hi > bounds.w1 + tol {
        return Err(FadeError::SandwichViolation { w0: bounds.w0, w1: bounds.w1, lo, hi });
    }
    let m = exps.m;
    let v = profile_field(w, bounds.dstar, exps);
    let integrand = w.zip_with(&v, |x, vv| (x - 1.0).powi(2) * vv.powf(m));
    let q = integrate(&integrand, 0.0)?;
    Ok((
        estimate(q, 0.5 * bounds.w1.powf(m - 2.0)),
        estimate(q, 0.5 * bounds.w0.powf(m - 2.0)),
    ))
}

/// `(beta1, beta2)` with `beta1 = W1^{2(2-m)} / W0` and `beta2 = 2d(1-m)((W1/W0)^{2(2-m)} - 1)`.
pub fn beta_constants(bounds: &SandwichBounds, exps: &Exponents) -> (f64, f64) {
    let m = exps.m;
    let a = 2.0 * (2.0 - m);
    let beta1 = bounds.w1.powf(a) / bounds.w0;
    let beta2 = 2.0 * exps.dim() * (1.0 - m) * ((bounds.w1 / bounds.w0).powf(a) - 1.0);
    (beta1, beta2)
}

/// Certified lower estimate of `gamma` in `gamma F <= I` for quotient bounds `(w0, w1)`,
/// or `None` when the admissibility condition fails.
pub fn gamma_from_quotient_bounds(w0: f64, w1: f64, exps: &Exponents, c_md: f64) -> Option<f64> {
    let m = exps.m;
    let a = 2.0 * (2.0 - m);
    let numerator = m - c_md * exps.dim() * (1.0 - m) * ((w1 / w0).powf(a) - 1.0);
    if numerator < -1e-14 * m {
        return None;
    }
    Some(2.0 * numerator.max(0.0) / (c_md * w0.powf(m - 3.0) * w1.powf(a)))
}

/// [`gamma_from_quotient_bounds`] applied to the sandwich `(W0, W1)`.
pub fn gamma_rate(bounds: &SandwichBounds, exps: &Exponents, c_md: f64) -> Option<f64> {
    gamma_from_quotient_bounds(bounds.w0, bounds.w1, exps, c_md)
}

/// Largest admissible `W1/W0` for which [`gamma_rate`] certifies a rate.
pub fn gamma_admissibility_threshold(exps: &Exponents, c_md: f64) -> f64 {
    let lambda = exps.m / c_md;
    (1.0 + lambda / (exps.dim() * (1.0 - exps.m))).powf(1.0 / (2.0 * (2.0 - exps.m)))
}

/// `int (v - V_{D*}) dx`.
pub fn relative_mass(v: &RadialField, dstar: f64, exps: &Exponents) -> Result<Estimate> {
    let diff = v.map_with_radius(|r, x| x - barenblatt_profile(exps, dstar, r));
    Ok(estimate(integrate(&diff, 0.0)?, 1.0))
}

/// The scale `D* in [D1, D0]` at which `v` has zero relative mass (requires `m > m_*`).
pub fn select_dstar(v: &RadialField, d1: f64, d0: f64, exps: &Exponents) -> Result<f64> {
    if !exps.above_m_star() {
        return Err(FadeError::NonIntegrableWeight {
            m: exps.m,
            d: exps.d,
            what: "relative mass is infinite unless D = D*",
        });
    }
    let mass = |d: f64| relative_mass(v, d, exps).map(|e| e.value);
    let (mut lo, mut hi) = (d1, d0);
    let (flo, fhi) = (mass(lo)?, mass(hi)?);
    if flo > 0.0 || fhi < 0.0 {
        return Err(FadeError::domain("relative mass does not change sign on [D1, D0]"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;
    use crate::profiles::derive_exponents;
    use std::sync::Arc;

    fn setup() -> (Exponents, Arc<RadialGrid>, SandwichBounds) {
        let e = derive_exponents(0.5, 3).unwrap();
        let g = Arc::new(RadialGrid::graded(3, 1e3, 2048).unwrap());
        let b = SandwichBounds::new(2.0, 0.5, 1.0, &e).unwrap();
        (e, g, b)
    }

    #[test]
    fn stable_densities_match_direct_formulas() {
        for &m in &[0.2, 0.5, 0.8] {
            for &u in &[-0.5, -1e-2, -2e-3, 1e-4, 5e-4, 2e-3, 0.7] {
                let w: f64 = 1.0 + u;
                let direct = ((w - 1.0) - (w.powf(m) - 1.0) / m) / (1.0 - m);
                let tol = if u.abs() >= 1e-3 { 1e-9 } else { 1e-6 };
                assert!((entropy_density(u, m) - direct).abs() <= tol * direct.abs(), "m={m} u={u}");
                assert!((entropy_density(u, m) / (0.5 * u * u) - 1.0).abs() < 2.0 * u.abs().max(1e-3));
                assert!((power_deviation(u, m) - (w.powf(m - 1.0) - 1.0)).abs() < 1e-14);
            }
            assert_eq!(entropy_density(0.0, m), 0.0);
        }
    }

    #[test]
    fn sandwich_bounds_examples() {
        let (e, _, b) = setup();
        assert!((b.w0 - 0.25).abs() < 1e-15 && (b.w1 - 4.0).abs() < 1e-15);
        assert!(SandwichBounds::new(0.5, 2.0, 1.0, &e).is_err());
        let b2 = SandwichBounds::from_quotient_bounds(0.25, 4.0, 1.0, &e).unwrap();
        assert!((b2.d0 - 2.0).abs() < 1e-14 && (b2.d1 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn functionals_vanish_at_equilibrium() {
        let (e, g, b) = setup();
        let w = RadialField::constant(g, 1.0);
        assert_eq!(relative_entropy(&w, &b, &e).unwrap().value, 0.0);
        assert_eq!(relative_fisher(&w, &b, &e).unwrap().value, 0.0);
        let gl = linearization_variable(&w, 1.0, &e);
        assert_eq!(linearized_entropy(&gl, 1.0, &e).unwrap().value, 0.0);
        assert_eq!(linearized_fisher(&gl, 1.0, &e).unwrap().value, 0.0);
        let (lo, hi) = entropy_equivalence_bounds(&w, &b, &e).unwrap();
        assert_eq!((lo.value, hi.value), (0.0, 0.0));
    }

    #[test]
    fn beta_examples() {
        let e = derive_exponents(0.5, 3).unwrap();
        let tight = SandwichBounds::from_quotient_bounds(1.0, 1.0, 1.0, &e).unwrap();
        assert_eq!(beta_constants(&tight, &e), (1.0, 0.0));
        let b = SandwichBounds::from_quotient_bounds(0.9, 1.1, 1.0, &e).unwrap();
        let (b1, b2) = beta_constants(&b, &e);
        assert!((b1 - 1.1f64.powi(3) / 0.9).abs() < 1e-14);
        assert!((b2 - 3.0 * ((1.1f64 / 0.9).powi(3) - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn gamma_examples() {
        let e = derive_exponents(0.5, 3).unwrap();
        let c = 0.9;
        assert!((gamma_from_quotient_bounds(1.0, 1.0, &e, c).unwrap() - 2.0 * 0.5 / c).abs() < 1e-15);
        let t = gamma_admissibility_threshold(&e, c);
        let at = gamma_from_quotient_bounds(1.0, t, &e, c).unwrap();
        assert!(at.abs() < 1e-12);
        assert!(gamma_from_quotient_bounds(1.0, t * 1.01, &e, c).is_none());
        let g = gamma_from_quotient_bounds(0.99, 1.01, &e, c).unwrap();
        assert!(g > 0.0 && g < 2.0 * 0.5 / c);
    }

    #[test]
    fn violated_sandwich_is_reported() {
        let (e, g, _) = setup();
        let b = SandwichBounds::from_quotient_bounds(0.9, 1.1, 1.0, &e).unwrap();
        let w = RadialField::constant(g, 1.2);
        assert!(matches!(
            entropy_equivalence_bounds(&w, &b, &e),
            Err(FadeError::SandwichViolation { .. })
        ));
        assert!((b.violation(w.values()) - 0.1).abs() < 1e-12);
    }
}
