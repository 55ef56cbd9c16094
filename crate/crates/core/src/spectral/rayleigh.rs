//! Discretized radial Rayleigh quotient `m int |h'|^2 nu / int |h - hbar|^2 mu`
//! with piecewise linear elements on a log-graded grid.
//!
//! The weights span hundreds of orders of magnitude over the grid, so the
//! pencil is assembled in log form and symmetrically rescaled by the lumped
//! mass before any arithmetic on matrix entries.

use crate::error::{FadeError, Result};
use crate::profiles::Exponents;

const GAUSS_X: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_9,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_3,
];
const GAUSS_W: [f64; 4] = [
    0.173_927_422_568_726_93,
    0.326_072_577_431_273_07,
    0.326_072_577_431_273_07,
    0.173_927_422_568_726_93,
];

/// Log-weights of the radial problem for the profile `V_D`.
#[derive(Debug, Clone, Copy)]
struct LogWeights {
    d: f64,
    dscale: f64,
    c: f64,
    inv_1m: f64,
    two_m: f64,
}

impl LogWeights {
    fn new(exps: &Exponents, dscale: f64) -> Self {
        Self {
            d: exps.dim(),
            dscale,
            c: exps.profile_coefficient(),
            inv_1m: 1.0 / (1.0 - exps.m),
            two_m: 2.0 - exps.m,
        }
    }

    fn ln_base(&self, r: f64) -> f64 {
        let cr2 = self.c * r * r;
        if cr2 > 1e16 * self.dscale {
            2.0 * r.ln() + self.c.ln() + (self.dscale / cr2).ln_1p()
        } else {
            (self.dscale + cr2).ln()
        }
    }

    /// `ln(r^{d-1} V^{2-m})` and `ln(r^{d-1} V)`.
    fn ln_mu_nu(&self, r: f64) -> (f64, f64) {
        let lr = (self.d - 1.0) * r.ln();
        let lb = self.ln_base(r) * self.inv_1m;
        (lr - self.two_m * lb, lr - lb)
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let hi = a.max(b);
    hi + (-(a - b).abs()).exp().ln_1p()
}

/// Element integrals in log form: `int mu phi_i phi_j = exp(ln_m) * mass[..]`,
/// `int nu phi_i' phi_j' = +-exp(ln_k) * stiff`.
#[derive(Debug, Clone, Copy)]
struct Element {
    ln_m: f64,
    mass: [f64; 3],
    ln_k: f64,
    stiff: f64,
}

fn element(w: &LogWeights, a: f64, b: f64) -> Element {
    let h = b - a;
    let mid = 0.5 * (a + b);
    let (lm_mid, lk_mid) = w.ln_mu_nu(mid);
    let mut mass = [0.0; 3];
    let mut stiff = 0.0;
    for (x, wt) in GAUSS_X.iter().zip(GAUSS_W) {
        let r = a + h * x;
        let (lm, lk) = w.ln_mu_nu(r);
        let em = wt * (lm - lm_mid).exp();
        mass[0] += em * (1.0 - x) * (1.0 - x);
        mass[1] += em * (1.0 - x) * x;
        mass[2] += em * x * x;
        stiff += wt * (lk - lk_mid).exp();
    }
    Element { ln_m: lm_mid + h.ln(), mass, ln_k: lk_mid - h.ln(), stiff }
}

/// Symmetric tridiagonal pencil `(K, M)` after diagonal rescaling by `exp(-scale/2)`.
#[derive(Debug, Clone)]
pub(crate) struct Pencil {
    pub scale: Vec<f64>,
    pub k_diag: Vec<f64>,
    pub k_off: Vec<f64>,
    pub m_diag: Vec<f64>,
    pub m_off: Vec<f64>,
}

impl Pencil {
    fn len(&self) -> usize {
        self.k_diag.len()
    }

    /// Number of eigenvalues of the pencil strictly below `sigma`.
    fn count_below(&self, sigma: f64) -> usize {
        let n = self.len();
        let mut count = 0;
        let mut pivot = self.k_diag[0] - sigma * self.m_diag[0];
        if pivot < 0.0 {
            count += 1;
        }
        for i in 1..n {
            let off = self.k_off[i - 1] - sigma * self.m_off[i - 1];
            let p = if pivot == 0.0 { f64::EPSILON * off.abs().max(1e-300) } else { pivot };
            pivot = self.k_diag[i] - sigma * self.m_diag[i] - off * off / p;
            if pivot < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn mass_apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.m_diag[i] * x[i];
                if i > 0 {
                    y += self.m_off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.m_off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    fn stiff_apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.k_diag[i] * x[i];
                if i > 0 {
                    y += self.k_off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.k_off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solve `(K - sigma M) y = b`.
    fn shifted_solve(&self, sigma: f64, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.len();
        let diag: Vec<f64> = (0..n).map(|i| self.k_diag[i] - sigma * self.m_diag[i]).collect();
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n - 1 {
            let off = self.k_off[i] - sigma * self.m_off[i];
            upper[i] = off;
            lower[i + 1] = off;
        }
        let mut y = b.to_vec();
        crate::solver::solve_tridiagonal(&lower, &diag, &upper, &mut y).then_some(y)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Assemble on the positive nodes `r`; with `dirichlet` the end nodes are removed,
/// otherwise the origin is prepended with a natural condition.
pub(crate) fn assemble(exps: &Exponents, dscale: f64, positive: &[f64], dirichlet: bool) -> Result<Pencil> {
    if positive.len() < 4 {
        return Err(FadeError::domain("spectral grid needs at least four positive nodes"));
    }
    let w = LogWeights::new(exps, dscale);
    let mut all = Vec::with_capacity(positive.len() + 1);
    if !dirichlet {
        all.push(0.0);
    }
    all.extend_from_slice(positive);
    let elems: Vec<Element> = all.windows(2).map(|p| element(&w, p[0], p[1])).collect();
    let n_all = all.len();
    let mut scale = vec![f64::NEG_INFINITY; n_all];
    for (e, el) in elems.iter().enumerate() {
        scale[e] = log_add(scale[e], el.ln_m + el.mass[0].ln());
        scale[e + 1] = log_add(scale[e + 1], el.ln_m + el.mass[2].ln());
    }
    let (first, last) = if dirichlet { (1, n_all - 2) } else { (0, n_all - 1) };
    let n = last - first + 1;
    let mut k_diag = vec![0.0; n];
    let mut m_diag = vec![0.0; n];
    let mut k_off = vec![0.0; n - 1];
    let mut m_off = vec![0.0; n - 1];
    for (e, el) in elems.iter().enumerate() {
        let (i, j) = (e, e + 1);
        let inside = |k: usize| k >= first && k <= last;
        if inside(i) {
            k_diag[i - first] += (el.ln_k - scale[i]).exp() * el.stiff;
            m_diag[i - first] += (el.ln_m - scale[i]).exp() * el.mass[0];
        }
        if inside(j) {
            k_diag[j - first] += (el.ln_k - scale[j]).exp() * el.stiff;
            m_diag[j - first] += (el.ln_m - scale[j]).exp() * el.mass[2];
        }
        if inside(i) && inside(j) {
            let half = 0.5 * (scale[i] + scale[j]);
            k_off[i - first] = -(el.ln_k - half).exp() * el.stiff;
            m_off[i - first] = (el.ln_m - half).exp() * el.mass[1];
        }
    }
    Ok(Pencil {
        scale: scale[first..=last].to_vec(),
        k_diag,
        k_off,
        m_diag,
        m_off,
    })
}

/// Eigenvalue of index `index` (0-based, ascending) of the pencil and its eigenvector.
pub(crate) fn eigenpair(pencil: &Pencil, index: usize, deflate: bool) -> Result<(f64, Vec<f64>)> {
    let mut hi = 1.0;
    while pencil.count_below(hi) <= index {
        hi *= 2.0;
        if hi > 1e30 {
            return Err(FadeError::EigenNonConvergence("no eigenvalue below 1e30".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pencil.count_below(mid) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    let theta = 0.5 * (lo + hi);
    let constant: Vec<f64> = pencil.scale.iter().map(|s| (0.5 * s).exp()).collect();
    let m_const = pencil.mass_apply(&constant);
    let c_norm = dot(&constant, &m_const);
    let project = |x: &mut Vec<f64>| {
        if deflate && c_norm > 0.0 {
            let a = dot(x, &m_const) / c_norm;
            for (xi, ci) in x.iter_mut().zip(&constant) {
                *xi -= a * ci;
            }
        }
    };
    let n = pencil.len();
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.7).sin()).collect();
    project(&mut x);
    let sigma = theta * (1.0 - 1e-10);
    let mut last_rq = f64::NAN;
    for _ in 0..50 {
        let b = pencil.mass_apply(&x);
        let mut y = pencil
            .shifted_solve(sigma, &b)
            .ok_or_else(|| FadeError::EigenNonConvergence("singular shifted system".into()))?;
        project(&mut y);
        let norm = dot(&y, &pencil.mass_apply(&y)).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(FadeError::EigenNonConvergence("inverse iteration broke down".into()));
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let rq = dot(&y, &pencil.stiff_apply(&y));
        x = y;
        if (rq - last_rq).abs() <= (1e-12 * rq.abs()).max(1e-14) {
            return Ok((theta, x));
        }
        last_rq = rq;
    }
    if (last_rq - theta).abs() <= (1e-6 * theta).max(1e-12) {
        return Ok((theta, x));
    }
    Err(FadeError::EigenNonConvergence(format!(
        "inverse iteration stalled: quotient {last_rq} against bisection {theta}"
    )))
}

/// Smallest admissible eigenvalue `theta = 1/C` of the radial problem on the positive nodes.
pub(crate) fn radial_theta(exps: &Exponents, dscale: f64, positive: &[f64]) -> Result<(f64, Pencil, Vec<f64>)> {
    let subcritical = exps.m < exps.m_star;
    let pencil = assemble(exps, dscale, positive, subcritical)?;
    let index = if subcritical { 0 } else { 1 };
    let (theta, vec) = eigenpair(&pencil, index, !subcritical)?;
    Ok((theta, pencil, vec))
}

/// The radial quotient `m int |h'|^2 nu / int |h - hbar|^2 mu` of nodal values `h`
/// on the positive nodes; `hbar` is the `mu`-mean for `m > m_*` and zero otherwise.
pub fn radial_rayleigh_quotient(exps: &Exponents, dscale: f64, positive: &[f64], h: &[f64]) -> Result<f64> {
    if positive.len() != h.len() || positive.len() < 2 {
        return Err(FadeError::domain("node and value lengths differ"));
    }
    let w = LogWeights::new(exps, dscale);
    let subcritical = exps.m < exps.m_star;
    let mut r = Vec::with_capacity(positive.len() + 1);
    let mut v = Vec::with_capacity(positive.len() + 1);
    if !subcritical {
        r.push(0.0);
        v.push(h[0]);
    }
    r.extend_from_slice(positive);
    v.extend_from_slice(h);
    let elems: Vec<Element> = r.windows(2).map(|p| element(&w, p[0], p[1])).collect();
    let reference = elems.iter().map(|e| e.ln_m).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut first = 0.0;
    let mut second = 0.0;
    let mut grad = 0.0;
    let k_ref = elems.iter().map(|e| e.ln_k).fold(f64::NEG_INFINITY, f64::max);
    for (e, el) in elems.iter().enumerate() {
        let (a, b) = (v[e], v[e + 1]);
        let s = (el.ln_m - reference).exp();
        total += s * (el.mass[0] + 2.0 * el.mass[1] + el.mass[2]);
        first += s * (a * (el.mass[0] + el.mass[1]) + b * (el.mass[1] + el.mass[2]));
        second += s * (a * a * el.mass[0] + 2.0 * a * b * el.mass[1] + b * b * el.mass[2]);
        grad += (el.ln_k - k_ref).exp() * el.stiff * (b - a) * (b - a);
    }
    let variance = if subcritical { second } else { second - first * first / total };
    if !(variance > 0.0) {
        return Err(FadeError::domain("test function has zero variance"));
    }
    Ok(exps.m * grad / variance * (k_ref - reference).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| (lo + (hi - lo) * k as f64 / n as f64).exp()).collect()
    }

    #[test]
    fn rescaled_mass_has_unit_diagonal() {
        let exps = Exponents::new(0.5, 3).unwrap();
        let p = assemble(&exps, 1.0, &log_nodes(-6.0, 20.0, 400), false).unwrap();
        assert!(p.m_diag.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(p.m_off.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let exps = Exponents::new(0.5, 3).unwrap();
        let p = assemble(&exps, 1.0, &log_nodes(-6.0, 20.0, 400), false).unwrap();
        let (theta0, _) = eigenpair(&p, 0, false).unwrap();
        assert!(theta0.abs() < 1e-10);
    }

    #[test]
    fn quotient_is_homogeneous() {
        let exps = Exponents::new(0.5, 3).unwrap();
        let nodes = log_nodes(-4.0, 10.0, 300);
        let h: Vec<f64> = nodes.iter().map(|r| r / (1.0 + r)).collect();
        let q1 = radial_rayleigh_quotient(&exps, 1.0, &nodes, &h).unwrap();
        let h2: Vec<f64> = h.iter().map(|x| -37.5 * x).collect();
        let q2 = radial_rayleigh_quotient(&exps, 1.0, &nodes, &h2).unwrap();
        assert!((q1 - q2).abs() <= 1e-13 * q1);
    }

    #[test]
    fn eigenvector_quotient_matches_eigenvalue() {
        let exps = Exponents::new(0.5, 3).unwrap();
        let nodes = log_nodes(-8.0, 30.0, 1200);
        let (theta, pencil, vec) = radial_theta(&exps, 1.0, &nodes).unwrap();
        let h: Vec<f64> = vec.iter().zip(&pencil.scale).map(|(x, s)| x * (-0.5 * s).exp()).collect();
        let q = radial_rayleigh_quotient(&exps, 1.0, &nodes, &h[1..]).unwrap();
        let lambda = exps.m * theta;
        assert!((q - lambda).abs() < 2e-3 * lambda, "{q} vs {lambda}");
    }
}
