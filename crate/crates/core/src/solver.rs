//! Time integration of the quotient form of the rescaled equation
//!
//! ```text
//! w_t = (1/V) div( w V grad p ),   p = m/(m-1) (w^{m-1} - 1) V^{m-1},   V = V_{D*}
//! ```
//!
//! for radial data by node-centred finite volumes with harmonic face mobilities,
//! a theta-scheme in time and Newton's method on the tridiagonal system.
//! The unknown is the deviation `u = w - 1`, which keeps small perturbations
//! free of cancellation.

use std::sync::Arc;

use crate::error::{FadeError, Result};
use crate::functionals::{
    entropy_density, power_deviation, relative_mass, EntropyReport, SandwichBounds,
};
use crate::grid::{sphere_area, RadialField, RadialGrid};
use crate::profiles::{barenblatt_profile, profile_power_m_minus_1, Exponents};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Newton stops once the scaled residual drops below `newton_tol * max|u^n|`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// 1 is backward Euler, 1/2 is Crank-Nicolson.
    pub theta: f64,
    /// Diagnostics and stored fields every this many steps (and at `t_end`).
    pub diag_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { dt: 2e-3, t_end: 20.0, newton_tol: 1e-12, newton_max_iter: 30, theta: 1.0, diag_every: 250 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(FadeError::domain("dt must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(FadeError::domain("t_end must be positive"));
        }
        if !(self.newton_tol > 0.0) {
            return Err(FadeError::domain("newton_tol must be positive"));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(FadeError::domain("theta must lie in [1/2, 1]"));
        }
        if self.newton_max_iter == 0 || self.diag_every == 0 {
            return Err(FadeError::domain("newton_max_iter and diag_every must be positive"));
        }
        Ok(())
    }
}

/// Stored states and diagnostics of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub exps: Exponents,
    pub bounds: SandwichBounds,
    pub times: Vec<f64>,
    /// The quotient `w` at each stored time.
    pub fields: Vec<RadialField>,
    pub reports: Vec<EntropyReport>,
    /// Cumulative `int_0^t I dt` (trapezoid over every accepted step) at each stored time.
    pub dissipation: Vec<f64>,
    /// Largest increase `F(t_{n+1}) - F(t_n)` over accepted steps (non-positive when dissipative).
    pub max_entropy_increase: f64,
    pub steps: usize,
    pub newton_iterations: usize,
    pub rejected_steps: usize,
}

/// Initial data families for the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `w0 = 1`.
    Equilibrium,
    /// `v0 = V_D`.
    Barenblatt { scale: f64 },
    /// `v0 = a V_{D0} + (1 - a) V_{D1}`, trapped between the two profiles.
    Mixture { d0: f64, d1: f64, weight: f64 },
    /// `w0 = 1 + a (1 + r^2)^{-1} [G(r; c, s) - k G(r; 2c + 2s, s)]` with `k` chosen
    /// so that the relative mass vanishes on the solver grid.
    Bump { amplitude: f64, center: f64, width: f64 },
}

/// Initial quotient and barriers ready for [`simulate`].
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub w0: RadialField,
    pub bounds: SandwichBounds,
}

/// Builds `w0` on `grid`. When `dstar` is `None` it is chosen by zero relative mass
/// (mixtures, `m > m_*`) or set to 1.
pub fn prepare_initial(
    data: InitialData,
    exps: &Exponents,
    grid: Arc<RadialGrid>,
    dstar: Option<f64>,
) -> Result<PreparedData> {
    match data {
        InitialData::Equilibrium => {
            let ds = dstar.unwrap_or(1.0);
            Ok(PreparedData {
                w0: RadialField::constant(grid, 1.0),
                bounds: SandwichBounds::new(ds, ds, ds, exps)?,
            })
        }
        InitialData::Barenblatt { scale } => {
            let ds = dstar.unwrap_or(1.0);
            let w0 = quotient_of_profiles(&grid, scale, ds, exps);
            let bounds = SandwichBounds::new(scale.max(ds), scale.min(ds), ds, exps)?;
            Ok(PreparedData { w0, bounds })
        }
        InitialData::Mixture { d0, d1, weight } => {
            if !(d1 > 0.0 && d1 < d0 && (0.0..=1.0).contains(&weight)) {
                return Err(FadeError::domain("mixture needs 0 < D1 < D0 and weight in [0, 1]"));
            }
            let quotient = |ds: f64, r: f64| {
                weight * profile_ratio(exps, d0, ds, r) + (1.0 - weight) * profile_ratio(exps, d1, ds, r)
            };
            let ds = match dstar {
                Some(ds) => ds,
                None => select_dstar_discrete(exps, &grid, d1, d0, |ds, r| quotient(ds, r) - 1.0)?,
            };
            let w0 = RadialField::from_fn(grid, |r| quotient(ds, r));
            Ok(PreparedData { w0, bounds: SandwichBounds::new(d0, d1, ds, exps)? })
        }
        InitialData::Bump { amplitude, center, width } => {
            let ds = dstar.unwrap_or(1.0);
            let gauss = |r: f64, c: f64| (-(r - c).powi(2) / (2.0 * width * width)).exp() / (1.0 + r * r);
            let c2 = 2.0 * center + 2.0 * width;
            let ops = Operator::new(exps, &grid, ds);
            let m1: f64 = (0..ops.n).map(|i| ops.vol[i] * gauss(ops.r[i], center)).sum();
            let m2: f64 = (0..ops.n).map(|i| ops.vol[i] * gauss(ops.r[i], c2)).sum();
            let k = m1 / m2;
            let w0 = RadialField::from_fn(grid, |r| 1.0 + amplitude * (gauss(r, center) - k * gauss(r, c2)));
            if w0.min() <= 0.0 {
                return Err(FadeError::domain("bump amplitude makes the quotient non-positive"));
            }
            let bounds = SandwichBounds::enclosing(&w0, ds, exps)?;
            Ok(PreparedData { w0, bounds })
        }
    }
}

/// Bisection for the `D*` in `[d1, d0]` at which the discrete relative mass
/// `sum_i vol_i u_i` of the deviation `u(D*, r)` vanishes.
fn select_dstar_discrete(
    exps: &Exponents,
    grid: &RadialGrid,
    d1: f64,
    d0: f64,
    deviation: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    if !exps.above_m_star() {
        return Err(FadeError::NonIntegrableWeight {
            m: exps.m,
            d: exps.d,
            what: "relative mass is infinite unless D = D*",
        });
    }
    let mass = |ds: f64| {
        let ops = Operator::new(exps, grid, ds);
        (0..ops.n).map(|i| ops.vol[i] * deviation(ds, ops.r[i])).sum::<f64>()
    };
    let (mut lo, mut hi) = (d1, d0);
    if mass(lo) > 0.0 || mass(hi) < 0.0 {
        return Err(FadeError::domain("relative mass does not change sign on [D1, D0]"));
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mass(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `V_D / V_{D*}` evaluated without cancellation.
pub fn profile_ratio(exps: &Exponents, d: f64, dstar: f64, r: f64) -> f64 {
    let c = exps.profile_coefficient() * r * r;
    (((dstar + c) / (d + c)).ln() / (1.0 - exps.m)).exp()
}

fn quotient_of_profiles(grid: &Arc<RadialGrid>, d: f64, dstar: f64, exps: &Exponents) -> RadialField {
    RadialField::from_fn(grid.clone(), |r| profile_ratio(exps, d, dstar, r))
}

/// Precomputed geometry of the finite-volume discretization.
struct Operator {
    m: f64,
    /// Number of unknowns; node `n` carries the Dirichlet value `u = 0`.
    n: usize,
    r: Vec<f64>,
    v: Vec<f64>,
    /// `V^{m-1}` at the nodes.
    vm1: Vec<f64>,
    /// `omega_d int_cell V r^{d-1} dr`.
    vol: Vec<f64>,
    /// `omega_d r_face^{d-1} / (r_{i+1} - r_i)` for faces `0..n`.
    kf: Vec<f64>,
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861136311594052575223946488892809, 0.347854845137453857373063949221999),
    (-0.339981043584856264802665759103245, 0.652145154862546142626936050778001),
    (0.339981043584856264802665759103245, 0.652145154862546142626936050778001),
    (0.861136311594052575223946488892809, 0.347854845137453857373063949221999),
];

impl Operator {
    fn new(exps: &Exponents, grid: &RadialGrid, dstar: f64) -> Self {
        let x = grid.nodes();
        let n = x.len() - 1;
        let d = grid.dim() as i32;
        let omega = sphere_area(grid.dim());
        let weight = |s: f64| barenblatt_profile(exps, dstar, s) * s.powi(d - 1);
        let cell = |a: f64, b: f64| -> f64 {
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            GAUSS4.iter().map(|&(t, wt)| wt * weight(c + h * t)).sum::<f64>() * h
        };
        let mut vol = Vec::with_capacity(n);
        for i in 0..n {
            let left = if i == 0 { 0.0 } else { 0.5 * (x[i - 1] + x[i]) };
            let right = 0.5 * (x[i] + x[i + 1]);
            let mid = x[i];
            vol.push(omega * (cell(left.min(mid), mid) + cell(mid, right)));
        }
        let kf = (0..n)
            .map(|i| {
                let rf = 0.5 * (x[i] + x[i + 1]);
                omega * rf.powi(d - 1) / (x[i + 1] - x[i])
            })
            .collect();
        Self {
            m: exps.m,
            n,
            r: x.to_vec(),
            v: x.iter().map(|&s| barenblatt_profile(exps, dstar, s)).collect(),
            vm1: x.iter().map(|&s| profile_power_m_minus_1(exps, dstar, s)).collect(),
            vol,
            kf,
        }
    }

    /// Pressure `p` at all nodes (the Dirichlet node has `p = 0`).
    fn pressure(&self, u: &[f64]) -> Vec<f64> {
        let c = self.m / (self.m - 1.0);
        let mut p: Vec<f64> = (0..self.n).map(|i| c * self.vm1[i] * power_deviation(u[i], self.m)).collect();
        p.push(0.0);
        p
    }

    fn mobility(&self, u: &[f64], i: usize) -> f64 {
        if i == self.n {
            self.v[i]
        } else {
            (1.0 + u[i]) * self.v[i]
        }
    }

    /// Face fluxes `F_{i+1/2}` for faces `0..n`.
    fn fluxes(&self, u: &[f64], p: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (a, b) = (self.mobility(u, i), self.mobility(u, i + 1));
                self.kf[i] * harmonic(a, b) * (p[i + 1] - p[i])
            })
            .collect()
    }

    /// `sum_i vol_i psi(u_i) V_i^{m-1}`, the discrete relative entropy.
    fn entropy(&self, u: &[f64]) -> f64 {
        (0..self.n).map(|i| self.vol[i] * entropy_density(u[i], self.m) * self.vm1[i]).sum()
    }

    /// `(1/m) sum_faces kf M (p_{i+1} - p_i)^2`, the discrete relative Fisher information.
    fn fisher(&self, u: &[f64]) -> f64 {
        let p = self.pressure(u);
        (0..self.n)
            .map(|i| {
                let (a, b) = (self.mobility(u, i), self.mobility(u, i + 1));
                self.kf[i] * harmonic(a, b) * (p[i + 1] - p[i]).powi(2)
            })
            .sum::<f64>()
            / self.m
    }

    /// `1/2 sum_i vol_i u_i^2 V_i^{m-1}`, the discrete linearized entropy.
    fn linear_entropy(&self, u: &[f64]) -> f64 {
        0.5 * (0..self.n).map(|i| self.vol[i] * u[i] * u[i] * self.vm1[i]).sum::<f64>()
    }

    /// `m sum_faces kf H(V_i, V_{i+1}) (g_{i+1} - g_i)^2` with `g = u V^{m-1}`.
    fn linear_fisher(&self, u: &[f64]) -> f64 {
        let g = |i: usize| if i == self.n { 0.0 } else { u[i] * self.vm1[i] };
        self.m
            * (0..self.n)
                .map(|i| self.kf[i] * harmonic(self.v[i], self.v[i + 1]) * (g(i + 1) - g(i)).powi(2))
                .sum::<f64>()
    }

    /// `sum_i vol_i u_i`, the discrete relative mass.
    fn mass(&self, u: &[f64]) -> f64 {
        (0..self.n).map(|i| self.vol[i] * u[i]).sum()
    }

    fn divergence(&self, flux: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| flux[i] - if i == 0 { 0.0 } else { flux[i - 1] }).collect()
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Solves a tridiagonal system in place (Thomas algorithm); `lower[0]` and `upper[n-1]` are unused.
pub(crate) fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> bool {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return false;
    }
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return false;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    true
}

struct StepOutcome {
    u: Vec<f64>,
    iterations: usize,
}

impl Operator {
    fn residual(&self, u: &[f64], u_old: &[f64], explicit: &[f64], dt: f64, theta: f64) -> Vec<f64> {
        let p = self.pressure(u);
        let div = self.divergence(&self.fluxes(u, &p));
        (0..self.n)
            .map(|i| self.vol[i] * (u[i] - u_old[i]) / dt - theta * div[i] - explicit[i])
            .collect()
    }

    fn scaled_norm(&self, res: &[f64], dt: f64) -> f64 {
        res.iter().zip(&self.vol).fold(0.0, |a, (&r, &v)| a.max((r * dt / v).abs()))
    }

    /// One theta-step of size `dt` from `u_old`, or `None` if Newton fails.
    fn step(&self, u_old: &[f64], dt: f64, cfg: &SolverConfig) -> Option<StepOutcome> {
        let n = self.n;
        let m = self.m;
        let theta = cfg.theta;
        let explicit: Vec<f64> = if theta < 1.0 {
            let p = self.pressure(u_old);
            self.divergence(&self.fluxes(u_old, &p)).iter().map(|x| (1.0 - theta) * x).collect()
        } else {
            vec![0.0; n]
        };
        let scale = u_old.iter().fold(0.0, |a: f64, &x| a.max(x.abs())).max(f64::MIN_POSITIVE);
        let tol = cfg.newton_tol * scale;
        let mut u = u_old.to_vec();
        let mut res = self.residual(&u, u_old, &explicit, dt, theta);
        let mut norm = self.scaled_norm(&res, dt);
        let mut iterations = 0;
        while norm > tol {
            if iterations >= cfg.newton_max_iter {
                return None;
            }
            iterations += 1;
            let p = self.pressure(&u);
            let dp: Vec<f64> = (0..n).map(|i| m * self.vm1[i] * (1.0 + u[i]).powf(m - 2.0)).collect();
            let mut lower = vec![0.0; n];
            let mut diag: Vec<f64> = (0..n).map(|i| self.vol[i] / dt).collect();
            let mut upper = vec![0.0; n];
            for f in 0..n {
                let (a, b) = (self.mobility(&u, f), self.mobility(&u, f + 1));
                let mh = harmonic(a, b);
                let da = 2.0 * b * b / ((a + b) * (a + b));
                let db = 2.0 * a * a / ((a + b) * (a + b));
                let jump = p[f + 1] - p[f];
                let k = self.kf[f];
                let d_left = k * (da * self.v[f] * jump - mh * dp[f]);
                // flux f enters residual f with sign -theta and residual f+1 with +theta
                diag[f] -= theta * d_left;
                if f + 1 < n {
                    let d_right = k * (db * self.v[f + 1] * jump + mh * dp[f + 1]);
                    upper[f] -= theta * d_right;
                    lower[f + 1] += theta * d_left;
                    diag[f + 1] += theta * d_right;
                }
            }
            let mut delta: Vec<f64> = res.iter().map(|x| -x).collect();
            if !solve_tridiagonal(&lower, &diag, &upper, &mut delta) {
                return None;
            }
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, b)| a + alpha * b).collect();
                if trial.iter().all(|&x| x > -1.0) {
                    let r2 = self.residual(&trial, u_old, &explicit, dt, theta);
                    let n2 = self.scaled_norm(&r2, dt);
                    if n2.is_finite() && (n2 <= (1.0 - 1e-4 * alpha) * norm || n2 <= tol) {
                        u = trial;
                        res = r2;
                        norm = n2;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        Some(StepOutcome { u, iterations })
    }
}

/// Integrates from `w0` up to `cfg.t_end`.
pub fn simulate(
    w0: &RadialField,
    bounds: &SandwichBounds,
    exps: &Exponents,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if w0.min() <= 0.0 {
        return Err(FadeError::domain("initial quotient must be positive"));
    }
    let grid = w0.grid().clone();
    let ops = Operator::new(exps, &grid, bounds.dstar);
    let n = ops.n;
    let mut u: Vec<f64> = w0.values()[..n].iter().map(|w| w - 1.0).collect();

    let mut traj = Trajectory {
        exps: *exps,
        bounds: *bounds,
        times: Vec::new(),
        fields: Vec::new(),
        reports: Vec::new(),
        dissipation: Vec::new(),
        max_entropy_increase: f64::NEG_INFINITY,
        steps: 0,
        newton_iterations: 0,
        rejected_steps: 0,
    };
    let record = |traj: &mut Trajectory, t: f64, u: &[f64], field: RadialField, diss: f64| -> Result<()> {
        let report = diagnostics(&ops, t, u, &field);
        traj.times.push(t);
        traj.fields.push(field);
        traj.reports.push(report);
        traj.dissipation.push(diss);
        Ok(())
    };
    record(&mut traj, 0.0, &u, w0.clone(), 0.0)?;

    let mut t = 0.0;
    let mut entropy = ops.entropy(&u);
    let mut fisher = ops.fisher(&u);
    let mut dissipation = 0.0;
    let mut since_diag = 0;
    let hard_tol = 1e-6;
    let n_steps = ((cfg.t_end / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    for k in 1..=n_steps {
        let t_next = if k == n_steps { cfg.t_end } else { k as f64 * cfg.dt };
        let dt_target = t_next - t;
        let mut dt = dt_target;
        let mut advanced = 0.0;
        while advanced < dt_target * (1.0 - 1e-14) {
            dt = dt.min(dt_target - advanced);
            match ops.step(&u, dt, cfg) {
                Some(out) => {
                    traj.newton_iterations += out.iterations;
                    u = out.u;
                    let new_entropy = ops.entropy(&u);
                    let new_fisher = ops.fisher(&u);
                    dissipation += 0.5 * dt * (fisher + new_fisher);
                    traj.max_entropy_increase = traj.max_entropy_increase.max(new_entropy - entropy);
                    entropy = new_entropy;
                    fisher = new_fisher;
                    advanced += dt;
                }
                None => {
                    traj.rejected_steps += 1;
                    dt *= 0.5;
                    if dt < cfg.dt * 1e-3 {
                        let res = ops.scaled_norm(&ops.residual(&u, &u, &vec![0.0; n], dt, cfg.theta), dt);
                        return Err(FadeError::NewtonDivergence { t: t + advanced, residual: res });
                    }
                }
            }
        }
        t = t_next;
        traj.steps += 1;
        since_diag += 1;
        let (lo, hi) = u.iter().fold((1.0f64, 1.0f64), |(a, b), &x| (a.min(1.0 + x), b.max(1.0 + x)));
        if lo < bounds.w0 - hard_tol || hi > bounds.w1 + hard_tol {
            return Err(FadeError::SandwichViolation { w0: bounds.w0, w1: bounds.w1, lo, hi });
        }
        if since_diag == cfg.diag_every || k == n_steps {
            since_diag = 0;
            let mut values: Vec<f64> = u.iter().map(|x| 1.0 + x).collect();
            values.push(1.0);
            let field = RadialField::new(grid.clone(), values)?;
            record(&mut traj, t, &u, field, dissipation)?;
        }
    }
    Ok(traj)
}

fn diagnostics(ops: &Operator, t: f64, u: &[f64], w: &RadialField) -> EntropyReport {
    EntropyReport {
        t,
        entropy: ops.entropy(u),
        fisher: ops.fisher(u),
        e_lin: ops.linear_entropy(u),
        i_lin: ops.linear_fisher(u),
        rel_mass: ops.mass(u),
        w_min: w.min(),
        w_max: w.max(),
    }
}

/// Per diagnostic interval: `|F(t2) - F(t1) + int I dt| / max(int I dt, floor)`.
pub fn entropy_production_residual(traj: &Trajectory) -> Vec<f64> {
    let floor = 1e-300;
    traj.reports
        .windows(2)
        .zip(traj.dissipation.windows(2))
        .map(|(r, d)| {
            let produced = d[1] - d[0];
            (r[1].entropy - r[0].entropy + produced).abs() / produced.max(floor)
        })
        .collect()
}

/// `max_t max(W0 - w, w - W1, 0)` over the stored fields.
pub fn sandwich_check(traj: &Trajectory, bounds: &SandwichBounds) -> f64 {
    traj.fields.iter().map(|w| bounds.violation(w.values())).fold(0.0, f64::max)
}

/// Largest excursion of the stored fields outside the Barenblatt barriers
/// `V_{D0}/V_{D*} <= w <= V_{D1}/V_{D*}`.
pub fn barrier_check(traj: &Trajectory) -> f64 {
    let b = &traj.bounds;
    let e = &traj.exps;
    traj.fields
        .iter()
        .map(|w| {
            w.grid()
                .nodes()
                .iter()
                .zip(w.values())
                .map(|(&r, &x)| {
                    let lo = profile_ratio(e, b.d0, b.dstar, r);
                    let hi = profile_ratio(e, b.d1, b.dstar, r);
                    (lo - x).max(x - hi).max(0.0)
                })
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// `max_t |M(t) - M(0)|` with the relative mass `int (v - V_{D*}) dx` computed by the
/// grid quadrature from the stored fields.
pub fn mass_drift(traj: &Trajectory, dstar: f64, exps: &Exponents) -> Result<f64> {
    let mut masses = Vec::with_capacity(traj.fields.len());
    for w in &traj.fields {
        let v = w.map_with_radius(|r, x| x * barenblatt_profile(exps, dstar, r));
        masses.push(relative_mass(&v, dstar, exps)?.value);
    }
    let m0 = masses.first().copied().unwrap_or(0.0);
    Ok(masses.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max))
}

/// `max_t |M_h(t) - M_h(0)|` for the discrete mass carried by the scheme itself.
pub fn discrete_mass_drift(traj: &Trajectory) -> f64 {
    let m0 = traj.reports.first().map(|r| r.rel_mass).unwrap_or(0.0);
    traj.reports.iter().map(|r| (r.rel_mass - m0).abs()).fold(0.0, f64::max)
}
