//! Radial weights of the Hardy-Poincaré problem in the normalization `D = 1`,
//! `c = 1`, their integrals, the median of `mu` and the Muckenhoupt-type
//! constants `A`, `B`, `K`.

use crate::error::{FadeError, Result};
use crate::quad::{adaptive, adaptive_log};

const REL_TOL: f64 = 1e-13;

/// `mu(r) = r^{d-1} (1+r^2)^{(2-m)/(m-1)}` and `nu(r) = r^{d-1} (1+r^2)^{1/(m-1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWeights {
    pub m: f64,
    pub d: u32,
}

/// `ln(1 + r^2)` without overflow for large `r`.
pub(crate) fn ln_one_plus_sq(r: f64) -> f64 {
    if r > 1e8 {
        2.0 * r.ln() + (r * r).recip().ln_1p()
    } else {
        (r * r).ln_1p()
    }
}

impl SpectralWeights {
    pub fn new(m: f64, d: u32) -> Result<Self> {
        if !(m > 0.0 && m < 1.0) || d == 0 {
            return Err(FadeError::domain(format!("invalid weights for m = {m}, d = {d}")));
        }
        Ok(Self { m, d })
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    /// `(2-m)/(1-m)`, the decay exponent of `(1+r^2)` in `mu`.
    pub fn beta(&self) -> f64 {
        (2.0 - self.m) / (1.0 - self.m)
    }

    pub fn mu(&self, r: f64) -> f64 {
        ((self.dim() - 1.0) * r.ln() - self.beta() * ln_one_plus_sq(r)).exp()
    }

    pub fn nu(&self, r: f64) -> f64 {
        ((self.dim() - 1.0) * r.ln() - ln_one_plus_sq(r) / (1.0 - self.m)).exp()
    }

    /// True when `mu` is integrable on `(0, inf)`.
    pub fn mu_integrable(&self) -> bool {
        2.0 * self.beta() > self.dim()
    }

    fn require_integrable(&self) -> Result<()> {
        if !self.mu_integrable() {
            return Err(FadeError::NonIntegrableWeight { m: self.m, d: self.d, what: "mu is not integrable" });
        }
        Ok(())
    }

    /// `int_R^inf r^{d-1} (1+r^2)^{-beta} dr` for `R >= 2` by the binomial series in `R^{-2}`.
    fn mu_tail_series(&self, big_r: f64) -> f64 {
        let beta = self.beta();
        let d = self.dim();
        let x = big_r.powi(-2);
        let mut coeff = 1.0;
        let mut pow = big_r.powf(d - 2.0 * beta);
        let mut sum = 0.0;
        for k in 0..200 {
            let kf = k as f64;
            let term = coeff * pow / (2.0 * beta + 2.0 * kf - d);
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
            coeff *= -(beta + kf) / (kf + 1.0);
            pow *= x;
        }
        sum
    }

    /// `int_a^b mu dr` for `0 <= a < b <= inf`.
    pub fn mu_integral(&self, a: f64, b: f64) -> Result<f64> {
        if !(b > a) {
            return Ok(0.0);
        }
        if b.is_infinite() {
            self.require_integrable()?;
            let cut = a.max(4.0);
            return Ok(self.mu_integral(a, cut)? + self.mu_tail_series(cut));
        }
        let mut total = 0.0;
        if a < 1.0 {
            total += adaptive(|r| self.mu(r), a, b.min(1.0), REL_TOL).0;
        }
        if b > 1.0 {
            total += adaptive_log(|r| self.mu(r), a.max(1.0), b, REL_TOL).0;
        }
        Ok(total)
    }

    /// `int_a^b dr / nu` for `0 < a < b < inf`.
    pub fn inv_nu_integral(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        adaptive_log(|r| 1.0 / self.nu(r), a, b, REL_TOL).0
    }

    pub fn mu_total(&self) -> Result<f64> {
        self.mu_integral(0.0, f64::INFINITY)
    }
}

/// The median `eta` of `mu`: `int_0^eta mu = (1/2) int_0^inf mu`, to relative tolerance `tol`.
pub fn median_eta_with_tolerance(weights: &SpectralWeights, tol: f64) -> Result<f64> {
    weights.require_integrable()?;
    let half = 0.5 * weights.mu_total()?;
    let cum = |r: f64| weights.mu_integral(0.0, r);
    let (mut lo, mut hi) = (1e-3f64, 1.0f64);
    while cum(hi)? < half {
        lo = hi;
        hi *= 4.0;
        if hi > 1e300 {
            return Err(FadeError::domain("median bracket failed"));
        }
    }
    while cum(lo)? > half {
        hi = lo;
        lo *= 0.25;
    }
    while hi - lo > tol * hi {
        let mid = (lo * hi).sqrt();
        if cum(mid)? < half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}

/// [`median_eta_with_tolerance`] at relative tolerance `1e-12`.
pub fn median_eta(weights: &SpectralWeights) -> Result<f64> {
    median_eta_with_tolerance(weights, 1e-12)
}

const SCAN_POINTS: usize = 1000;

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
        if (b - a).abs() < 1e-12 {
            break;
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `A(zeta) = sup_{0<r<zeta} int_0^r mu * int_r^zeta 1/nu`.
pub fn muckenhoupt_a(zeta: f64, weights: &SpectralWeights) -> Result<f64> {
    if !(zeta > 0.0) {
        return Ok(0.0);
    }
    let s_hi = zeta.ln();
    let s_lo = s_hi - 6.0 * std::f64::consts::LN_10;
    let ds = (s_hi - s_lo) / SCAN_POINTS as f64;
    // scan downward from zeta, accumulating int_r^zeta 1/nu
    let mut inv = 0.0;
    let mut prev = zeta;
    let mut best = (0.0, s_hi);
    for k in 1..=SCAN_POINTS {
        let s = s_hi - k as f64 * ds;
        let r = s.exp();
        inv += weights.inv_nu_integral(r, prev);
        prev = r;
        let val = weights.mu_integral(0.0, r)? * inv;
        if val > best.0 {
            best = (val, s);
        }
    }
    let product = |s: f64| {
        let r = s.exp();
        weights.mu_integral(0.0, r).unwrap_or(f64::NAN) * weights.inv_nu_integral(r, zeta)
    };
    let (_, refined) = golden_max(product, (best.1 - ds).max(s_lo), (best.1 + ds).min(s_hi));
    Ok(refined.max(best.0))
}

/// `B(zeta) = sup_{r>zeta} int_zeta^r 1/nu * int_r^inf mu`, including the limit `r -> inf`.
pub fn muckenhoupt_b(zeta: f64, weights: &SpectralWeights) -> Result<f64> {
    weights.require_integrable()?;
    if !(zeta > 0.0) {
        if weights.d >= 2 {
            return Err(FadeError::domain("B(0) is infinite for d >= 2"));
        }
        return muckenhoupt_b_from_origin(weights);
    }
    let s_lo = zeta.ln();
    let s_hi = s_lo + 12.0 * std::f64::consts::LN_10;
    let ds = (s_hi - s_lo) / SCAN_POINTS as f64;
    let mut inv = 0.0;
    let mut prev = zeta;
    let mut best = (0.0, s_lo);
    for k in 1..=SCAN_POINTS {
        let s = s_lo + k as f64 * ds;
        let r = s.exp();
        inv += weights.inv_nu_integral(prev, r);
        prev = r;
        let val = inv * weights.mu_integral(r, f64::INFINITY)?;
        if val > best.0 {
            best = (val, s);
        }
    }
    let product = |s: f64| {
        let r = s.exp();
        weights.inv_nu_integral(zeta, r) * weights.mu_integral(r, f64::INFINITY).unwrap_or(f64::NAN)
    };
    let (_, refined) = golden_max(product, (best.1 - ds).max(s_lo), (best.1 + ds).min(s_hi));
    Ok(refined.max(best.0).max(b_limit(weights)))
}

/// Limit of the `B` product as `r -> inf`: `1/p^2` with `p = [2 - d + 2/(1-m)]`.
fn b_limit(weights: &SpectralWeights) -> f64 {
    let p = 2.0 - weights.dim() + 2.0 / (1.0 - weights.m);
    if p > 0.0 {
        1.0 / (p * p)
    } else {
        0.0
    }
}

fn muckenhoupt_b_from_origin(weights: &SpectralWeights) -> Result<f64> {
    let s_lo = -12.0 * std::f64::consts::LN_10;
    let s_hi = 12.0 * std::f64::consts::LN_10;
    let ds = (s_hi - s_lo) / SCAN_POINTS as f64;
    let base = s_lo.exp();
    let mut inv = adaptive(|r| 1.0 / weights.nu(r), 0.0, base, REL_TOL).0;
    let mut prev = base;
    let mut best = 0.0f64;
    for k in 1..=SCAN_POINTS {
        let r = (s_lo + k as f64 * ds).exp();
        inv += weights.inv_nu_integral(prev, r);
        prev = r;
        best = best.max(inv * weights.mu_integral(r, f64::INFINITY)?);
    }
    Ok(best.max(b_limit(weights)))
}

/// `K(zeta) = (2m/(1-m)) max{A(zeta), B(zeta)}`; `K(0)` uses `B` alone.
pub fn muckenhoupt_k(zeta: f64, weights: &SpectralWeights) -> Result<f64> {
    let factor = 2.0 * weights.m / (1.0 - weights.m);
    let b = muckenhoupt_b(zeta, weights)?;
    let a = if zeta > 0.0 { muckenhoupt_a(zeta, weights)? } else { 0.0 };
    Ok(factor * a.max(b))
}
