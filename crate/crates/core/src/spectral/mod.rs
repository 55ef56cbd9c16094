//! Hardy-Poincaré constants `C_{m,d}` and gaps `lambda_{m,d} = m / C_{m,d}`.
//!
//! Three routes are provided: the closed form below `m_*`, the Muckenhoupt-type
//! envelope built from the median of `mu`, and a direct finite-element
//! minimization of the radial Rayleigh quotient.

mod rayleigh;
mod weights;

pub use rayleigh::radial_rayleigh_quotient;
pub use weights::{
    median_eta, median_eta_with_tolerance, muckenhoupt_a, muckenhoupt_b, muckenhoupt_k, SpectralWeights,
};

use crate::error::{FadeError, Result};
use crate::grid::RadialGrid;
use crate::profiles::{Exponents, CRITICAL_TOLERANCE};
use crate::quad::adaptive;

/// `ln r` range and step of the default spectral grid.
pub const DEFAULT_LOG_MIN: f64 = -8.0;
pub const DEFAULT_LOG_MAX: f64 = 72.0;
pub const DEFAULT_LOG_STEP: f64 = 0.025;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub m: f64,
    pub d: u32,
    pub lambda_est: f64,
    /// Estimated discretization error of `lambda_est`.
    pub lambda_err: f64,
    pub c_est: f64,
    pub c_exact: Option<f64>,
    pub k_eta: Option<f64>,
    pub eta: Option<f64>,
    pub lower_bound: f64,
    pub upper_bound: Option<f64>,
    /// `lambda_est` recomputed with the profile scale doubled.
    pub lambda_double_scale: f64,
    pub method_tags: Vec<&'static str>,
}

impl SpectralResult {
    /// `lower <= C_est <= upper` up to the reported numerical error.
    pub fn within_envelope(&self) -> bool {
        let c_err = self.c_est * self.lambda_err / self.lambda_est;
        let slack = c_err + 1e-12 * self.c_est;
        let upper_ok = self.upper_bound.is_none_or(|u| self.c_est <= u + slack);
        self.lower_bound <= self.c_est + slack && upper_ok
    }
}

fn bracket(exps: &Exponents) -> f64 {
    let d = exps.dim();
    d - 4.0 - exps.m * (d - 2.0)
}

/// `8m(1-m) / [(d-2)(m - m_*)]^2`, optimal for `d >= 5` and `m < m_*`.
///
/// When `m` is a short rational the value is computed in exact integer arithmetic.
pub fn exact_gap_subcritical(exps: &Exponents) -> Result<f64> {
    if exps.d < 5 || exps.m >= exps.m_star {
        return Err(FadeError::domain(format!(
            "closed-form constant needs d >= 5 and m < m_* = {} (got m = {}, d = {})",
            exps.m_star, exps.m, exps.d
        )));
    }
    if let Some((p, q)) = rational_approximation(exps.m) {
        let d = exps.d as i128;
        let b = q * (d - 4) - p * (d - 2);
        return Ok((8 * p * (q - p)) as f64 / (b * b) as f64);
    }
    let b = bracket(exps);
    Ok(8.0 * exps.m * (1.0 - exps.m) / (b * b))
}

/// `p/q` with `q <= 10^6` reproducing `x` to a few ulp, found by continued fractions.
fn rational_approximation(x: f64) -> Option<(i128, i128)> {
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = x;
    for _ in 0..40 {
        let a = rest.floor();
        let ai = a as i128;
        (h0, h1) = (h1, ai * h1 + h0);
        (k0, k1) = (k1, ai * k1 + k0);
        if k1 > 1_000_000 {
            return None;
        }
        if ((h1 as f64) / (k1 as f64) - x).abs() <= 4.0 * f64::EPSILON * x.abs() {
            return Some((h1, k1));
        }
        let frac = rest - a;
        if frac == 0.0 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

/// Optimal weighted Hardy constant `kappa_alpha = 4 / (d + 2 alpha - 2)^2`.
pub fn hardy_constant(alpha: f64, d: u32) -> Result<f64> {
    let denom = d as f64 + 2.0 * alpha - 2.0;
    if denom.abs() <= CRITICAL_TOLERANCE {
        return Err(FadeError::SingularHardy { alpha, d });
    }
    Ok(4.0 / (denom * denom))
}

/// Rayleigh quotient `int |grad g|^2 |x|^{2 alpha} / int |g|^2 |x|^{2 alpha - 2}` of the
/// truncated power `g_eps = min{eps^{-a}, (|x|^{-a} - eps^{a})_+}`, `a = (2 alpha + d - 2)/2`.
///
/// For `a < 0` the family is taken with `eps` replaced by `1/eps`, which is the
/// mirror image under `r -> 1/r` and keeps both integrals finite.
pub fn hardy_test_quotient(alpha: f64, d: u32, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(FadeError::domain(format!("eps = {eps} must lie in (0, 1)")));
    }
    let lam = (2.0 * alpha + d as f64 - 2.0) / 2.0;
    if lam.abs() <= CRITICAL_TOLERANCE {
        return Err(FadeError::SingularHardy { alpha, d });
    }
    // In s = ln r (mirrored when lam < 0) both integrands carry exp(2 a s).
    let a = lam.abs();
    let ln_eps = eps.ln();
    let s_b = -ln_eps;
    let s_a = -((-a * ln_eps).exp() + (a * ln_eps).exp()).ln() / a;
    let eps_a = (a * ln_eps).exp();
    let profile = |s: f64| (-a * s).exp() - eps_a;
    let num_density = |s: f64| {
        let g = -a * (-a * s).exp();
        g * g * (2.0 * a * s).exp()
    };
    let den_density = |s: f64| {
        let g = profile(s);
        g * g * (2.0 * a * s).exp()
    };
    let plateau = (-a * ln_eps).exp();
    let cap_start = s_a - 40.0 / a;
    let cap = adaptive(|s| plateau * plateau * (2.0 * a * s).exp(), cap_start, s_a, 1e-13).0;
    let mut num = 0.0;
    let mut den = cap;
    // split the active range into unit pieces in s
    let pieces = ((s_b - s_a).ceil() as usize).max(1);
    let ds = (s_b - s_a) / pieces as f64;
    for k in 0..pieces {
        let lo = s_a + k as f64 * ds;
        let hi = lo + ds;
        num += adaptive(num_density, lo, hi, 1e-13).0;
        den += adaptive(den_density, lo, hi, 1e-13).0;
    }
    Ok(num / den)
}

/// Lower end `8m(1-m)/[d-4-m(d-2)]^2` and upper end of the envelope for `C_{m,d}`.
///
/// The upper end is the closed form below `m_*`, `max{2K(eta), 4m/((1-m)(d-1))}`
/// for `m_* < m <= (d-2)/(d-1)`, and absent otherwise.
pub fn gap_envelope(exps: &Exponents) -> Result<(f64, Option<f64>)> {
    exps.require_not_m_star()?;
    let b = bracket(exps);
    let lower = 8.0 * exps.m * (1.0 - exps.m) / (b * b);
    if exps.m < exps.m_star {
        return Ok((lower, exact_gap_subcritical(exps).ok()));
    }
    if !k_finite_range(exps) {
        return Ok((lower, None));
    }
    let w = SpectralWeights::new(exps.m, exps.d)?;
    let eta = median_eta(&w)?;
    let k = muckenhoupt_k(eta, &w)?;
    let sphere = 4.0 * exps.m / ((1.0 - exps.m) * (exps.dim() - 1.0));
    Ok((lower, Some((2.0 * k).max(sphere))))
}

/// `m_* < m <= (d-2)/(d-1)` with `d >= 3`.
pub fn k_finite_range(exps: &Exponents) -> bool {
    if exps.d < 3 {
        return false;
    }
    let top = (exps.dim() - 2.0) / (exps.dim() - 1.0);
    exps.m > exps.m_star + CRITICAL_TOLERANCE && exps.m <= top + CRITICAL_TOLERANCE
}

/// [`muckenhoupt_k`] at the median, rejecting parameters where `K(eta)` is not finite.
pub fn muckenhoupt_k_at_median(exps: &Exponents) -> Result<(f64, f64)> {
    if !k_finite_range(exps) {
        return Err(FadeError::NonIntegrableWeight {
            m: exps.m,
            d: exps.d,
            what: "K(eta) is finite only for m_* < m <= (d-2)/(d-1)",
        });
    }
    let w = SpectralWeights::new(exps.m, exps.d)?;
    let eta = median_eta(&w)?;
    Ok((eta, muckenhoupt_k(eta, &w)?))
}

/// Closed-form upper bound on `K(eta)`:
/// `m(2-m) 2^{(3-2m)/(1-m)} (1 + 2^{(2-m)/(1-m)}) / (d [d-4-m(d-2)]^2)`.
pub fn k_bound_displayed(exps: &Exponents) -> f64 {
    let m = exps.m;
    let b = bracket(exps);
    m * (2.0 - m) * 2f64.powf((3.0 - 2.0 * m) / (1.0 - m)) * (1.0 + 2f64.powf((2.0 - m) / (1.0 - m)))
        / (exps.dim() * b * b)
}

/// Default log-uniform spectral grid, `refinement` times longer in `ln r` at the same step.
pub fn default_spectral_grid(d: u32, refinement: usize) -> Result<RadialGrid> {
    let k = refinement.max(1) as f64;
    let span = (DEFAULT_LOG_MAX - DEFAULT_LOG_MIN) * k;
    let n = (span / DEFAULT_LOG_STEP).round() as usize;
    RadialGrid::log_uniform(d, DEFAULT_LOG_MIN * k, DEFAULT_LOG_MIN * k + span, n)
}

fn positive_nodes(grid: &RadialGrid) -> Vec<f64> {
    grid.nodes().iter().copied().filter(|&r| r > 0.0).collect()
}

fn lambda_on(exps: &Exponents, dscale: f64, nodes: &[f64]) -> Result<f64> {
    let (theta, _, _) = rayleigh::radial_theta(exps, dscale, nodes)?;
    Ok(exps.m * theta)
}

/// Radial gap `lambda = m * theta_min` of the discretized problem on `grid` for the profile `V_D`.
///
/// The error bar is the larger change under keeping only the middle half of the
/// nodes and under dropping every other node.
pub fn rayleigh_gap(exps: &Exponents, dscale: f64, grid: &RadialGrid) -> Result<SpectralResult> {
    exps.require_not_m_star()?;
    if !(dscale > 0.0) || !dscale.is_finite() {
        return Err(FadeError::domain(format!("profile scale {dscale} must be positive")));
    }
    if grid.dim() != exps.d {
        return Err(FadeError::domain("grid dimension differs from exponents"));
    }
    let nodes = positive_nodes(grid);
    let lambda = lambda_on(exps, dscale, &nodes)?;

    let n = nodes.len();
    let coarse: Vec<f64> = nodes.iter().step_by(2).copied().collect();
    let middle = nodes[n / 4..n - n / 4].to_vec();
    let mut err: f64 = 0.0;
    for variant in [&coarse, &middle] {
        let alt = lambda_on(exps, dscale, variant)?;
        err = err.max((alt - lambda).abs());
    }
    let lambda_2d = lambda_on(exps, 2.0 * dscale, &nodes)?;

    let (lower, upper) = gap_envelope(exps)?;
    let mut tags = vec!["rayleigh"];
    let c_exact = exact_gap_subcritical(exps).ok();
    if c_exact.is_some() {
        tags.push("exact");
    }
    let (eta, k_eta) = if k_finite_range(exps) {
        let (eta, k) = muckenhoupt_k_at_median(exps)?;
        tags.push("muckenhoupt");
        (Some(eta), Some(k))
    } else {
        (None, None)
    };
    Ok(SpectralResult {
        m: exps.m,
        d: exps.d,
        lambda_est: lambda,
        lambda_err: err,
        c_est: exps.m / lambda,
        c_exact,
        k_eta,
        eta,
        lower_bound: lower,
        upper_bound: upper,
        lambda_double_scale: lambda_2d,
        method_tags: tags,
    })
}

/// `lambda_{m,d}`: the closed form below `m_*`, otherwise the Rayleigh value on the default grid.
pub fn predicted_lambda(exps: &Exponents) -> Result<f64> {
    exps.require_not_m_star()?;
    if let Ok(c) = exact_gap_subcritical(exps) {
        return Ok(exps.m / c);
    }
    let grid = default_spectral_grid(exps.d, 1)?;
    Ok(rayleigh_gap(exps, 1.0, &grid)?.lambda_est)
}

/// [`predicted_lambda`] with the full spectral report.
pub fn spectral_report(exps: &Exponents, refinement: usize) -> Result<SpectralResult> {
    let grid = default_spectral_grid(exps.d, refinement)?;
    rayleigh_gap(exps, 1.0, &grid)
}
