//! Critical exponents, Barenblatt profiles, the self-similar change of
//! variables and the quotient map `w = v / V_{D*}`.

use std::sync::Arc;

use crate::error::{FadeError, Result};
use crate::grid::{RadialField, RadialGrid};

/// Absolute tolerance on `m - m_c` below which the critical branch is used.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Supercritical,
    Critical,
    Subcritical,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Supercritical => "supercritical",
            Regime::Critical => "critical",
            Regime::Subcritical => "subcritical",
        }
    }
}

/// All exponents derived from `(m, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub m: f64,
    pub d: u32,
    pub m_c: f64,
    pub m_star: f64,
    pub m_1: f64,
    pub m_0: f64,
    pub p_star: f64,
    pub p_of_m: f64,
    pub q_star: f64,
}

/// Computes every exponent from `(m, d)`; rejects `m` outside (0,1) and `d < 3`.
pub fn derive_exponents(m: f64, d: u32) -> Result<Exponents> {
    if !(m > 0.0 && m < 1.0) {
        return Err(FadeError::domain(format!("m = {m} must lie in (0, 1)")));
    }
    if d < 3 {
        return Err(FadeError::domain(format!("dimension d = {d} must be at least 3")));
    }
    let df = d as f64;
    Ok(Exponents {
        m,
        d,
        m_c: (df - 2.0) / df,
        m_star: (df - 4.0) / (df - 2.0),
        m_1: (df - 1.0) / df,
        m_0: df / (df + 2.0),
        p_star: df * (1.0 - m) / 2.0,
        p_of_m: df * (1.0 - m) / (2.0 * (2.0 - m)),
        q_star: 2.0 * df * (1.0 - m) / (2.0 * (2.0 - m) + df * (1.0 - m)),
    })
}

impl Exponents {
    pub fn new(m: f64, d: u32) -> Result<Self> {
        derive_exponents(m, d)
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    pub fn regime(&self) -> Regime {
        let delta = self.m - self.m_c;
        if delta.abs() <= CRITICAL_TOLERANCE {
            Regime::Critical
        } else if delta > 0.0 {
            Regime::Supercritical
        } else {
            Regime::Subcritical
        }
    }

    /// The coefficient `(1-m)/(2m)` in front of `r^2` in `V_D`.
    pub fn profile_coefficient(&self) -> f64 {
        (1.0 - self.m) / (2.0 * self.m)
    }

    /// True when `m` lies strictly above `m_*`, i.e. profile differences are integrable.
    pub fn above_m_star(&self) -> bool {
        self.m > self.m_star
    }

    /// Fails with a domain error when `m` coincides with `m_*`.
    pub fn require_not_m_star(&self) -> Result<()> {
        if (self.m - self.m_star).abs() <= CRITICAL_TOLERANCE {
            return Err(FadeError::domain(format!(
                "m = {} coincides with m_* = {} for d = {}",
                self.m, self.m_star, self.d
            )));
        }
        Ok(())
    }
}

/// `V_D(r) = (D + (1-m)/(2m) r^2)^{-1/(1-m)}`.
pub fn barenblatt_profile(exps: &Exponents, scale: f64, r: f64) -> f64 {
    (scale + exps.profile_coefficient() * r * r).powf(-1.0 / (1.0 - exps.m))
}

/// `V_D(r)^{m-1} = D + (1-m)/(2m) r^2`, which is exact and cheap.
pub fn profile_power_m_minus_1(exps: &Exponents, scale: f64, r: f64) -> f64 {
    scale + exps.profile_coefficient() * r * r
}

/// Analytic radial derivative `-(r/m) V_D^{2-m}`.
pub fn barenblatt_profile_derivative(exps: &Exponents, scale: f64, r: f64) -> f64 {
    -(r / exps.m) * barenblatt_profile(exps, scale, r).powf(2.0 - exps.m)
}

/// Parameters of a Barenblatt (or pseudo-Barenblatt) solution `U_{D,T}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    /// Scale `D > 0`.
    pub scale: f64,
    /// Reference time `T >= 0`; the extinction time in the subcritical regime.
    pub time_shift: f64,
    pub exponents: Exponents,
}

impl ProfileParams {
    pub fn new(exponents: Exponents, scale: f64, time_shift: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(FadeError::domain(format!("scale D = {scale} must be positive")));
        }
        if !(time_shift >= 0.0) || !time_shift.is_finite() {
            return Err(FadeError::domain(format!(
                "time shift T = {time_shift} must be non-negative"
            )));
        }
        Ok(Self { scale, time_shift, exponents })
    }

    pub fn profile(&self, r: f64) -> f64 {
        barenblatt_profile(&self.exponents, self.scale, r)
    }
}

/// The scale factor `R(tau)` of the matching regime.
pub fn scale_radius(params: &ProfileParams, tau: f64) -> Result<f64> {
    let e = &params.exponents;
    let t = params.time_shift;
    let df = e.dim();
    let regime = e.regime();
    match regime {
        Regime::Critical => Ok((tau + t).exp()),
        Regime::Supercritical => {
            let k = df * (e.m - e.m_c);
            let base = k * (tau + t);
            if !(base > 0.0) {
                return Err(FadeError::Existence { regime: regime.name(), tau });
            }
            Ok(base.powf(1.0 / k))
        }
        Regime::Subcritical => {
            let k = df * (e.m_c - e.m);
            let base = k * (t - tau);
            if !(base > 0.0) {
                return Err(FadeError::Existence { regime: regime.name(), tau });
            }
            Ok(base.powf(-1.0 / k))
        }
    }
}

/// `U_{D,T}(tau, r) = R(tau)^{-d} V_D(r / R(tau))`.
pub fn barenblatt_solution(params: &ProfileParams, tau: f64, r: f64) -> Result<f64> {
    let big_r = scale_radius(params, tau)?;
    Ok(big_r.powi(-(params.exponents.d as i32)) * params.profile(r / big_r))
}

/// Snapshot of the rescaled solution together with its rescaled time.
#[derive(Debug, Clone)]
pub struct RescaledSnapshot {
    /// `v` on the grid scaled by `1/R(tau)`; exact, no interpolation.
    pub v: RadialField,
    pub t: f64,
    pub radius: f64,
}

impl RescaledSnapshot {
    /// Resamples `v` onto another grid by monotone cubic interpolation.
    pub fn onto(&self, target: &Arc<RadialGrid>) -> RadialField {
        self.v.resample(target)
    }
}

/// Maps a snapshot `u(tau, .)` to `v(t, x) = R^d u(R x)` with `t = log(R(tau)/R(0))`.
pub fn rescale_snapshot(u: &RadialField, tau: f64, params: &ProfileParams) -> Result<RescaledSnapshot> {
    let big_r = scale_radius(params, tau)?;
    let r0 = scale_radius(params, 0.0)?;
    let factor = big_r.powi(params.exponents.d as i32);
    let grid = Arc::new(u.grid().scaled(1.0 / big_r)?);
    let values = u.values().iter().map(|&x| factor * x).collect();
    Ok(RescaledSnapshot {
        v: RadialField::new(grid, values)?,
        t: (big_r / r0).ln(),
        radius: big_r,
    })
}

/// Inverse of [`rescale_snapshot`]: `u(tau, y) = R^{-d} v(y / R)`, on the grid scaled by `R`.
pub fn unscale_snapshot(v: &RadialField, tau: f64, params: &ProfileParams) -> Result<RadialField> {
    let big_r = scale_radius(params, tau)?;
    let factor = big_r.powi(-(params.exponents.d as i32));
    let grid = Arc::new(v.grid().scaled(big_r)?);
    RadialField::new(grid, v.values().iter().map(|&x| factor * x).collect())
}

/// Pointwise `w = v / V_{D*}`.
pub fn quotient_field(v: &RadialField, dstar: f64, exps: &Exponents) -> RadialField {
    v.map_with_radius(|r, x| x / barenblatt_profile(exps, dstar, r))
}
