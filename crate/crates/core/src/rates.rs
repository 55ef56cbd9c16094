//! Decay-rate predictions, exponential fits of simulated series, moment and
//! interpolation estimates, and the time-dependent certified rate `gamma(t)`.

use crate::error::{FadeError, Result};
use crate::functionals::{gamma_from_quotient_bounds, gamma_rate, relative_entropy, SandwichBounds};
use crate::grid::{integrate, RadialField};
use crate::profiles::{barenblatt_profile, Exponents};
use crate::solver::Trajectory;
use crate::spectral::SpectralResult;

/// Exponents predicted from `lambda_{m,d}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePrediction {
    pub m: f64,
    pub d: u32,
    pub lambda: f64,
    /// Certified `gamma` in `gamma F <= I` for the sandwich, when admissible.
    pub gamma_nl: Option<f64>,
    /// `2 lambda`, the decay rate of the relative entropy.
    pub rate_f: f64,
    pub q_star: f64,
}

impl RatePrediction {
    /// `lambda` for `q > q_*`.
    pub fn rate_lq(&self, q: f64) -> Option<f64> {
        (q > self.q_star).then_some(self.lambda)
    }

    /// `lambda + d(q-1)/q`, the rate in the original variables.
    pub fn alpha_original(&self, q: f64) -> Option<f64> {
        let d = self.d as f64;
        self.rate_lq(q).map(|l| if q.is_infinite() { l + d } else { l + d * (q - 1.0) / q })
    }

    /// `2 lambda / (d + 2(j+1))` for the `C^j` norm.
    pub fn rate_cj(&self, j: u32) -> f64 {
        2.0 * self.lambda / (self.d as f64 + 2.0 * (j as f64 + 1.0))
    }

    /// `(2p - d)(1-m) lambda / (p (d+2)(2-m))` for the relative error in `L^p`.
    pub fn rate_relerr(&self, p: f64) -> f64 {
        let d = self.d as f64;
        let m = self.m;
        if p.is_infinite() {
            return 2.0 * (1.0 - m) * self.lambda / ((d + 2.0) * (2.0 - m));
        }
        (2.0 * p - d) * (1.0 - m) * self.lambda / (p * (d + 2.0) * (2.0 - m))
    }

    /// Exponent `gamma(q)` of the entropy in `||v - V||_q <= K F^{gamma(q)}`.
    pub fn gamma_of_q(&self, q: f64) -> Option<f64> {
        let d = self.d as f64;
        if !(q > self.q_star) {
            None
        } else if q <= 2.0 {
            Some(0.5)
        } else if q.is_infinite() {
            Some(1.0 / (d + 2.0))
        } else {
            Some((q + d) / (q * (d + 2.0)))
        }
    }
}

/// Rates from the spectral gap, taken from the closed-form constant when one is known.
pub fn predict_rates(exps: &Exponents, spectral: &SpectralResult, bounds: &SandwichBounds) -> Result<RatePrediction> {
    exps.require_not_m_star()?;
    if spectral.d != exps.d || (spectral.m - exps.m).abs() > 1e-15 {
        return Err(FadeError::domain("spectral result belongs to different (m, d)"));
    }
    let lambda = spectral.c_exact.map_or(spectral.lambda_est, |c| exps.m / c);
    Ok(RatePrediction {
        m: exps.m,
        d: exps.d,
        lambda,
        gamma_nl: gamma_rate(bounds, exps, exps.m / lambda),
        rate_f: 2.0 * lambda,
        q_star: exps.q_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub window: (f64, f64),
    /// Slope of `ln(value)` against `t`.
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares fit of `ln(value) = intercept + slope t` over samples with `t` in `window`.
pub fn fit_exponential(series: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    if !(window.1 > window.0) {
        return Err(FadeError::domain("fit window must have t_hi > t_lo"));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .copied()
        .collect();
    if pts.len() < 5 {
        return Err(FadeError::InsufficientData(format!(
            "{} points in [{}, {}], need at least 5",
            pts.len(),
            window.0,
            window.1
        )));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(FadeError::domain(format!("non-positive value {v} at t = {t}")));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(t, v) in &pts {
        sxx += (t - tm) * (t - tm);
        sxy += (t - tm) * (v.ln() - ym);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let ss: f64 = pts.iter().map(|&(t, v)| (v.ln() - intercept - slope * t).powi(2)).sum();
    Ok(RateFit { window, slope, intercept, residual: (ss / n).sqrt(), points: pts.len() })
}

/// `[t0 + (T - t0)/2, T]` where `t0` is the first stored time with `||w - 1||_inf < 0.1`.
pub fn default_fit_window(traj: &Trajectory) -> Result<(f64, f64)> {
    let t_end = *traj.times.last().ok_or_else(|| FadeError::InsufficientData("empty trajectory".into()))?;
    let t0 = traj
        .reports
        .iter()
        .find(|r| (r.w_max - 1.0).max(1.0 - r.w_min) < 0.1)
        .map(|r| r.t)
        .ok_or_else(|| FadeError::InsufficientData("trajectory never enters ||w - 1|| < 0.1".into()))?;
    Ok((t0 + 0.5 * (t_end - t0), t_end))
}

/// `(t, F)` pairs from the stored diagnostics.
pub fn entropy_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.reports.iter().map(|r| (r.t, r.entropy)).collect()
}

/// `kappa_theta = 2 sup_r r^{2 theta} (D + c r^2)^{-(2-m)/(1-m)}`.
pub fn kappa_theta(theta: f64, dstar: f64, exps: &Exponents) -> Result<f64> {
    let m = exps.m;
    let beta = (2.0 - m) / (1.0 - m);
    if !(theta >= 0.0 && theta < beta) {
        return Err(FadeError::domain(format!("theta = {theta} must lie in [0, {beta})")));
    }
    let c = exps.profile_coefficient();
    if theta == 0.0 {
        return Ok(2.0 * dstar.powf(-beta));
    }
    let x = theta * dstar / (c * (beta - theta));
    Ok(2.0 * x.powf(theta) * (dstar + c * x).powf(-beta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    /// `|| |x|^theta (v - V_{D*}) ||_2`.
    pub norm: f64,
    pub kappa_theta: f64,
    /// `K_theta = (kappa_theta W1^{2-m})^{1/2}`.
    pub k_theta: f64,
    pub entropy: f64,
    /// `K_theta F^{1/2}`.
    pub bound: f64,
    /// Quadrature error estimate of `norm`.
    pub error: f64,
}

/// Weighted norm `|| |x|^theta (v - V_{D*}) ||_2` of `v = w V_{D*}` and its entropy bound.
pub fn moment_norm(w: &RadialField, bounds: &SandwichBounds, exps: &Exponents, theta: f64) -> Result<MomentEstimate> {
    let kappa = kappa_theta(theta, bounds.dstar, exps)?;
    let diff = w.map_with_radius(|r, x| {
        let v = barenblatt_profile(exps, bounds.dstar, r);
        let y = (x - 1.0) * v;
        if theta == 0.0 { y * y } else { r.powf(2.0 * theta) * y * y }
    });
    let q = integrate(&diff, 0.0)?;
    let norm = q.value.max(0.0).sqrt();
    let error = if norm > 0.0 { 0.5 * q.error / norm } else { q.error.sqrt() };
    let f = relative_entropy(w, bounds, exps)?.value;
    let k_theta = (kappa * bounds.w1.powf(2.0 - exps.m)).sqrt();
    Ok(MomentEstimate { norm, kappa_theta: kappa, k_theta, entropy: f, bound: k_theta * f.max(0.0).sqrt(), error })
}

/// `sup_r max(|f''|, |f'/r|, |f'' - f'/r|/2)`, the largest second partial of a radial function.
fn c2_seminorm(f: &RadialField) -> f64 {
    let df = f.gradient();
    let ddf = df.gradient();
    let nodes = f.grid().nodes();
    let mut best: f64 = 0.0;
    for ((&r, &second), &first) in nodes.iter().zip(ddf.values()).zip(df.values()) {
        let first_over_r = if r > 0.0 { first / r } else { second };
        best = best.max(second.abs()).max(first_over_r.abs()).max(0.5 * (second - first_over_r).abs());
    }
    best
}

/// Both sides of `||f||_{C^j} <= C ||f||_{C^{j+1}}^{(d+2j)/(d+2j+2)} ||f||_2^{2/(d+2j+2)}`
/// without the constant, for `j` in `{0, 1}`.
pub fn interpolation_check(f: &RadialField, j: u32) -> Result<(f64, f64)> {
    if j > 1 {
        return Err(FadeError::domain("only j = 0 and j = 1 are supported"));
    }
    if f.max_abs() == 0.0 {
        return Ok((0.0, 0.0));
    }
    let d = f.grid().dim() as f64;
    let l2 = integrate(&f.map(|x| x * x), 0.0)?.value.max(0.0).sqrt();
    let (lhs, upper) = if j == 0 {
        (f.max_abs(), f.gradient().max_abs())
    } else {
        (f.gradient().max_abs(), c2_seminorm(f))
    };
    let jf = j as f64;
    let denom = d + 2.0 * (jf + 1.0);
    Ok((lhs, upper.powf((d + 2.0 * jf) / denom) * l2.powf(2.0 / denom)))
}

/// Time series of the certified rate along a trajectory and the integrated Gronwall bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEnvelope {
    pub times: Vec<f64>,
    pub sigma0: Vec<f64>,
    pub sigma1: Vec<f64>,
    /// `gamma(t)`, zero where uncertified.
    pub gamma: Vec<f64>,
    pub certified: Vec<bool>,
    pub log_f: Vec<f64>,
    /// `log F(t_0) - int_{t_0}^t gamma`.
    pub log_f_bound: Vec<f64>,
}

impl RateEnvelope {
    /// `int_{t_i}^{t_j} gamma` with the smaller endpoint value on each interval.
    fn integral(&self, i: usize, j: usize) -> f64 {
        (i..j)
            .map(|k| self.gamma[k].min(self.gamma[k + 1]) * (self.times[k + 1] - self.times[k]))
            .sum()
    }

    /// Largest `log F(t_j) - log F(t_i) + int_{t_i}^{t_j} gamma - slack` over pairs `i < j`;
    /// non-positive when the envelope holds everywhere.
    pub fn worst_pair(&self, slack: f64) -> f64 {
        let n = self.times.len();
        let mut cum = vec![0.0; n];
        for k in 1..n {
            cum[k] = cum[k - 1] + self.integral(k - 1, k);
        }
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max(self.log_f[j] - self.log_f[i] + (cum[j] - cum[i]) - slack);
            }
        }
        worst
    }

    pub fn all_certified(&self) -> bool {
        self.certified.iter().all(|&c| c)
    }
}

/// `gamma(t)` from the instantaneous sandwich `sigma0 = min(w_min, 1)`, `sigma1 = max(w_max, 1)`
/// and the constant `C_{m,d} = m / lambda_est`.
pub fn sharp_rate_envelope(traj: &Trajectory, exps: &Exponents, spectral: &SpectralResult) -> Result<RateEnvelope> {
    if traj.reports.is_empty() {
        return Err(FadeError::InsufficientData("trajectory has no diagnostics".into()));
    }
    let c_md = exps.m / spectral.lambda_est;
    let mut env = RateEnvelope {
        times: Vec::new(),
        sigma0: Vec::new(),
        sigma1: Vec::new(),
        gamma: Vec::new(),
        certified: Vec::new(),
        log_f: Vec::new(),
        log_f_bound: Vec::new(),
    };
    for rep in traj.reports.iter().filter(|r| r.entropy > 0.0) {
        let s0 = rep.w_min.min(1.0);
        let s1 = rep.w_max.max(1.0);
        let g = gamma_from_quotient_bounds(s0, s1, exps, c_md);
        env.times.push(rep.t);
        env.sigma0.push(s0);
        env.sigma1.push(s1);
        env.gamma.push(g.unwrap_or(0.0));
        env.certified.push(g.is_some());
        env.log_f.push(rep.entropy.ln());
    }
    if env.times.is_empty() {
        return Err(FadeError::InsufficientData("no positive entropy values".into()));
    }
    let mut bound = env.log_f[0];
    env.log_f_bound.push(bound);
    for k in 1..env.times.len() {
        bound -= env.integral(k - 1, k);
        env.log_f_bound.push(bound);
    }
    Ok(env)
}
