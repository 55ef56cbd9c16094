//! Graded radial grids, radial fields, weighted quadrature over R^d with a
//! fitted power-law tail, and radial differentiation.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{FadeError, Result};

/// Minimum number of intervals accepted by the checked constructors.
pub const MIN_INTERVALS: usize = 64;
/// Minimum outer radius accepted by the checked constructors.
pub const MIN_RADIUS: f64 = 10.0;

/// Surface area of the unit sphere in R^d, `2 pi^{d/2} / Gamma(d/2)`.
pub fn sphere_area(d: u32) -> f64 {
    let (mut area, mut k) = if d.is_multiple_of(2) { (2.0 * PI, 2) } else { (2.0, 1) };
    while k < d {
        area *= 2.0 * PI / k as f64;
        k += 2;
    }
    area
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: u32,
    nodes: Vec<f64>,
    /// Geometric growth ratio of the outer part (1 for uniform grids).
    ratio: f64,
    /// Expected decay exponent of integrands beyond `r_max`, informational only.
    pub tail_exponent_hint: f64,
}

impl RadialGrid {
    /// Uniform spacing `h` on `[0, 1]`, then geometric with ratio `q = 1 + h` up to `r_max`.
    /// `intervals` is the total number of intervals `N`.
    pub fn graded(dim: u32, r_max: f64, intervals: usize) -> Result<Self> {
        check_shape(dim, r_max, intervals)?;
        let log_rmax = r_max.ln();
        let mismatch = |n_u: usize| -> f64 {
            let n_g = (intervals - n_u) as f64;
            (log_rmax / n_g).exp_m1() - 1.0 / n_u as f64
        };
        let mut best = 1;
        for n_u in 1..intervals {
            if mismatch(n_u).abs() < mismatch(best).abs() {
                best = n_u;
            }
        }
        let n_u = best;
        let n_g = intervals - n_u;
        let ratio = (log_rmax / n_g as f64).exp();
        let mut nodes = Vec::with_capacity(intervals + 1);
        for i in 0..=n_u {
            nodes.push(i as f64 / n_u as f64);
        }
        for j in 1..=n_g {
            nodes.push(if j == n_g { r_max } else { (log_rmax * j as f64 / n_g as f64).exp() });
        }
        Ok(Self { dim, nodes, ratio, tail_exponent_hint: f64::NAN })
    }

    /// The origin followed by `n_log + 1` nodes uniform in `ln r` on `[log_min, log_max]`.
    pub fn log_uniform(dim: u32, log_min: f64, log_max: f64, n_log: usize) -> Result<Self> {
        if !(log_max > log_min) {
            return Err(FadeError::domain("log_max must exceed log_min"));
        }
        check_shape(dim, log_max.exp(), n_log + 1)?;
        let step = (log_max - log_min) / n_log as f64;
        let mut nodes = Vec::with_capacity(n_log + 2);
        nodes.push(0.0);
        for i in 0..=n_log {
            nodes.push((log_min + step * i as f64).exp());
        }
        Ok(Self { dim, nodes, ratio: step.exp(), tail_exponent_hint: f64::NAN })
    }

    /// Grid from explicit nodes; `nodes[0]` must be 0 and the nodes strictly increasing.
    pub fn from_nodes(dim: u32, nodes: Vec<f64>) -> Result<Self> {
        let n = nodes.len().saturating_sub(1);
        check_shape(dim, *nodes.last().unwrap_or(&0.0), n)?;
        if nodes[0] != 0.0 {
            return Err(FadeError::domain("first node must be r = 0"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(FadeError::domain("nodes must be finite and strictly increasing"));
        }
        let ratio = nodes[n] / nodes[n - 1];
        Ok(Self { dim, nodes, ratio, tail_exponent_hint: f64::NAN })
    }

    /// Same grid with every node multiplied by `factor`. Size checks are not re-applied.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(FadeError::domain(format!("scale factor {factor} must be positive")));
        }
        Ok(Self {
            dim: self.dim,
            nodes: self.nodes.iter().map(|r| r * factor).collect(),
            ratio: self.ratio,
            tail_exponent_hint: self.tail_exponent_hint,
        })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().expect("grid has nodes")
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Largest spacing relative to the local radius scale, a proxy for `h`.
    pub fn relative_step(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| (w[1] - w[0]) / w[1].max(1.0))
            .fold(0.0, f64::max)
    }
}

fn check_shape(dim: u32, r_max: f64, intervals: usize) -> Result<()> {
    if dim < 1 {
        return Err(FadeError::domain("dimension must be positive"));
    }
    if intervals < MIN_INTERVALS {
        return Err(FadeError::domain(format!(
            "grid needs at least {MIN_INTERVALS} intervals, got {intervals}"
        )));
    }
    if !(r_max >= MIN_RADIUS) || !r_max.is_finite() {
        return Err(FadeError::domain(format!("r_max = {r_max} must be at least {MIN_RADIUS}")));
    }
    Ok(())
}

/// Values of a radial function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FadeError::domain(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FadeError::domain(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Arc<RadialGrid>, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&x| f(x)).collect() }
    }

    pub fn map_with_radius(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.grid.nodes().iter().zip(&self.values).map(|(&r, &x)| f(r, x)).collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.values.len(), other.values.len(), "fields live on different grids");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| c * x)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &x| a.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `omega_d * int f(r) r^k r^{d-1} dr` with tail correction, see [`integrate`].
    pub fn integrate(&self, weight_exponent: f64) -> Result<Quadrature> {
        integrate(self, weight_exponent)
    }

    pub fn gradient(&self) -> Self {
        radial_gradient(self)
    }

    /// Evaluates the field at `r` by monotone cubic interpolation, with power-law
    /// extrapolation beyond the last node.
    pub fn interpolate(&self, r: f64) -> f64 {
        Pchip::new(self.grid.nodes(), &self.values).eval(r)
    }

    /// Resamples onto another grid by monotone cubic interpolation.
    pub fn resample(&self, target: &Arc<RadialGrid>) -> Self {
        let p = Pchip::new(self.grid.nodes(), &self.values);
        let values = target.nodes().iter().map(|&r| p.eval(r)).collect();
        Self { grid: target.clone(), values }
    }
}

/// Result of a radial integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Total, including the tail beyond `r_max`.
    pub value: f64,
    /// Estimated absolute error (discretization plus tail uncertainty).
    pub error: f64,
    /// The analytic tail contribution alone.
    pub tail: f64,
}

/// `omega_d * [ int_0^{r_max} f r^{k+d-1} dr + fitted tail ]`.
///
/// The tail is `int_{r_max}^inf c r^p r^{d-1} dr` with `(c, p)` from a least-squares
/// fit of `log|f r^k|` against `log r` over the last quarter of the nodes.
pub fn integrate(f: &RadialField, weight_exponent: f64) -> Result<Quadrature> {
    let grid = f.grid();
    let d = grid.dim() as f64;
    let nodes = grid.nodes();
    let power = weight_exponent + d - 1.0;
    let g: Vec<f64> = nodes
        .iter()
        .zip(f.values())
        .map(|(&r, &v)| if v == 0.0 { 0.0 } else { v * r.powf(power) })
        .collect();
    if g.iter().any(|x| !x.is_finite()) {
        return Err(FadeError::domain("integrand is not finite on the grid"));
    }
    let fine = simpson(nodes, &g);
    let coarse_idx: Vec<usize> = (0..nodes.len())
        .filter(|&i| i % 2 == 0 || i == nodes.len() - 1)
        .collect();
    let cx: Vec<f64> = coarse_idx.iter().map(|&i| nodes[i]).collect();
    let cg: Vec<f64> = coarse_idx.iter().map(|&i| g[i]).collect();
    let coarse = simpson(&cx, &cg);

    let n = nodes.len();
    let (tail, tail_err) = match fit_tail(nodes, f.values(), weight_exponent, n - n / 4)? {
        None => (0.0, g[n - 1].abs() * grid.r_max()),
        Some((c, p)) => {
            let s = p + d;
            if s >= 0.0 {
                return Err(FadeError::DivergentTail { exponent: p + d - 1.0 });
            }
            let tail = c * grid.r_max().powf(s) / -s;
            let alt = match fit_tail(nodes, f.values(), weight_exponent, n - n / 8)? {
                Some((c2, p2)) => c2 * grid.r_max().powf(p2 + d) / -(p2 + d),
                None => tail,
            };
            (tail, (tail - alt).abs())
        }
    };
    let omega = sphere_area(grid.dim());
    Ok(Quadrature {
        value: omega * (fine + tail),
        error: omega * ((fine - coarse).abs() / 15.0 + tail_err + 4.0 * f64::EPSILON * fine.abs()),
        tail: omega * tail,
    })
}

/// Fits `|f r^k| ~ c r^p` over nodes `start..`; returns `None` when the field is not
/// of one strict sign at the end of the grid (e.g. compactly supported data) or when
/// the end values are not a power law (rms log residual above 1/2, as for round-off noise).
fn fit_tail(nodes: &[f64], values: &[f64], k: f64, start: usize) -> Result<Option<(f64, f64)>> {
    let n = nodes.len();
    let last = values[n - 1];
    if last == 0.0 {
        return Ok(None);
    }
    let mut lo = n - 1;
    while lo > start && values[lo - 1] != 0.0 && values[lo - 1].signum() == last.signum() && nodes[lo - 1] > 1.0 {
        lo -= 1;
    }
    if n - lo < 4 {
        return Ok(None);
    }
    let xs: Vec<f64> = nodes[lo..].iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = (lo..n).map(|i| (values[i].abs() * nodes[i].powf(k)).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    if !slope.is_finite() || !intercept.is_finite() {
        return Err(FadeError::domain("tail fit produced non-finite coefficients"));
    }
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    if rms > 0.5 {
        return Ok(None);
    }
    Ok(Some((last.signum() * intercept.exp(), slope)))
}

/// Least-squares line `y = slope x + intercept`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Composite Simpson rule on arbitrary nodes; a trailing odd interval is handled by
/// the quadratic through the last three nodes.
pub fn simpson(x: &[f64], g: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (x[1] - x[0]) * (g[0] + g[1]);
    }
    let mut sum = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let hs = h0 + h1;
        sum += hs / 6.0
            * ((2.0 - h1 / h0) * g[i] + hs * hs / (h0 * h1) * g[i + 1] + (2.0 - h0 / h1) * g[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let hs = h0 + h1;
        sum += -h1 * h1 * h1 / (6.0 * h0 * hs) * g[i - 1]
            + (h1 * h1 / (6.0 * h0) + 0.5 * h1) * g[i]
            + (h1 * h1 / 3.0 + 0.5 * h0 * h1) / hs * g[i + 1];
    }
    sum
}

/// Second-order radial derivative: centred three-point stencil inside, one-sided
/// three-point stencil at `r_max`, and `0` at the origin.
pub fn radial_gradient(f: &RadialField) -> RadialField {
    let x = f.grid().nodes();
    let v = f.values();
    let n = x.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        out[i] = (h0 * h0 * v[i + 1] - h1 * h1 * v[i - 1] + (h1 * h1 - h0 * h0) * v[i])
            / (h0 * h1 * (h0 + h1));
    }
    let h1 = x[n - 1] - x[n - 2];
    let h0 = x[n - 2] - x[n - 3];
    let hs = h0 + h1;
    out[n - 1] = h1 / (h0 * hs) * v[n - 3] - hs / (h0 * h1) * v[n - 2] + (2.0 * h1 + h0) / (h1 * hs) * v[n - 1];
    if x[0] != 0.0 {
        let h0 = x[1] - x[0];
        let h1 = x[2] - x[1];
        let hs = h0 + h1;
        out[0] = -(2.0 * h0 + h1) / (h0 * hs) * v[0] + hs / (h0 * h1) * v[1] - h0 / (h1 * hs) * v[2];
    }
    RadialField { grid: f.grid().clone(), values: out }
}

/// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson slopes).
struct Pchip<'a> {
    x: &'a [f64],
    y: &'a [f64],
    slopes: Vec<f64>,
}

impl<'a> Pchip<'a> {
    fn new(x: &'a [f64], y: &'a [f64]) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                slopes[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Self { x, y, slopes }
    }

    fn eval(&self, r: f64) -> f64 {
        let (x, y) = (self.x, self.y);
        let n = x.len();
        if r <= x[0] {
            return y[0];
        }
        if r >= x[n - 1] {
            let (a, b) = (y[n - 2], y[n - 1]);
            if a * b > 0.0 && x[n - 2] > 0.0 {
                let p = (b / a).ln() / (x[n - 1] / x[n - 2]).ln();
                return b * (r / x[n - 1]).powf(p);
            }
            return b;
        }
        let i = match x.binary_search_by(|p| p.partial_cmp(&r).expect("finite nodes")) {
            Ok(i) => return y[i],
            Err(i) => i - 1,
        };
        let h = x[i + 1] - x[i];
        let t = (r - x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * y[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(r_max: f64, n: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::graded(3, r_max, n).unwrap())
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn graded_grid_shape() {
        let g = RadialGrid::graded(3, 1e3, 2048).unwrap();
        assert_eq!(g.len(), 2049);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.r_max(), 1e3);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        let h = g.nodes()[1];
        assert!((g.ratio() - 1.0 - h).abs() < 0.2 * h);
    }

    #[test]
    fn grid_validation() {
        assert!(RadialGrid::graded(3, 5.0, 128).is_err());
        assert!(RadialGrid::graded(3, 100.0, 32).is_err());
        let mut nodes: Vec<f64> = (0..=100).map(|i| i as f64 * 0.2).collect();
        nodes[50] = nodes[49];
        assert!(RadialGrid::from_nodes(3, nodes).is_err());
    }

    #[test]
    fn simpson_is_exact_on_quadratics() {
        let x = [0.0, 0.3, 1.0, 1.2, 2.5, 2.6];
        let g: Vec<f64> = x.iter().map(|t| 3.0 * t * t - 2.0 * t + 1.0).collect();
        let exact = 2.6f64.powi(3) - 2.6 * 2.6 + 2.6;
        assert!((simpson(&x, &g) - exact).abs() < 1e-12);
        let x5 = [0.0, 0.5, 0.7, 1.9, 2.0];
        let g5: Vec<f64> = x5.iter().map(|t| t * t).collect();
        assert!((simpson(&x5, &g5) - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn integrate_zero() {
        let f = RadialField::constant(grid(100.0, 128), 0.0);
        let q = f.integrate(0.0).unwrap();
        assert_eq!(q.value, 0.0);
        assert_eq!(q.error, 0.0);
    }

    #[test]
    fn integrate_power_decay_with_tail() {
        // int_{R^3} (1+r^2)^{-3} dx = pi^2/4
        let f = RadialField::from_fn(grid(1e3, 2048), |r| (1.0 + r * r).powi(-3));
        let q = f.integrate(0.0).unwrap();
        assert!((q.value - PI * PI / 4.0).abs() < 1e-8, "{q:?}");
        assert!(q.error < 1e-6);
    }

    #[test]
    fn gradient_of_quadratic_is_exact() {
        let f = RadialField::from_fn(grid(100.0, 128), |r| r * r);
        let g = f.gradient();
        for (&r, &v) in f.grid().nodes().iter().zip(g.values()) {
            assert!((v - 2.0 * r).abs() <= 1e-9 * (1.0 + r), "r={r} v={v}");
        }
        let c = RadialField::constant(f.grid().clone(), 3.0).gradient();
        assert!(c.max_abs() < 1e-12);
    }

    #[test]
    fn pchip_reproduces_nodes_and_is_monotone() {
        let f = RadialField::from_fn(grid(100.0, 128), |r| 1.0 / (1.0 + r * r));
        for &r in f.grid().nodes().iter().take(40) {
            assert!((f.interpolate(r) - 1.0 / (1.0 + r * r)).abs() < 1e-15);
        }
        let mut prev = f64::INFINITY;
        for k in 0..2000 {
            let v = f.interpolate(k as f64 * 0.05);
            assert!(v <= prev);
            prev = v;
        }
        assert!((f.interpolate(200.0) * 4e4 - 1.0).abs() < 1e-3);
    }
}
