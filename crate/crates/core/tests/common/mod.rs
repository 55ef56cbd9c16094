#![allow(dead_code)]

use std::sync::Arc;

use fade_core::grid::RadialGrid;
use fade_core::profiles::Exponents;

pub fn exps(m: f64, d: u32) -> Exponents {
    Exponents::new(m, d).unwrap()
}

pub fn graded(d: u32, r_max: f64, n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::graded(d, r_max, n).unwrap())
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Composite Gauss-Legendre (5 points) on `n` equal pieces of `[a, b]`.
pub fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    for k in 0..n {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// `int_0^inf f(r) dr` via `r = e^s` on `s in [-40, 40]`.
pub fn radial_oracle(f: impl Fn(f64) -> f64) -> f64 {
    gauss(|s| f(s.exp()) * s.exp(), -40.0, 40.0, 8000)
}
