//! Randomized checks of the functional inequalities on an admissible family,
//! and the deterministic Hardy witness. Every suite is reproducible from a seed.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FadeError, Result};
use crate::functionals::{
    beta_constants, entropy_equivalence_bounds, gamma_rate, linearization_variable, linearized_entropy,
    linearized_fisher, relative_entropy, relative_fisher, SandwichBounds,
};
use crate::grid::{RadialField, RadialGrid};
use crate::profiles::{barenblatt_profile, Exponents};
use crate::quad::{adaptive, adaptive_log};
use crate::rates::moment_norm;
use crate::spectral::{hardy_constant, hardy_test_quotient, predicted_lambda};

/// Outer radius of the grid carrying the randomized family.
pub const FAMILY_R_MAX: f64 = 200.0;

/// Parameter points sampled by the randomized suites.
pub const FAMILY_POINTS: [(f64, u32); 3] = [(0.5, 3), (0.45, 4), (0.55, 5)];

/// One line of the verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub instances: usize,
    /// Smallest margin `rhs - lhs + allowance` over the instances.
    pub worst_slack: f64,
    pub passed: bool,
}

impl SuiteReport {
    fn new(name: &'static str) -> Self {
        Self { name, instances: 0, worst_slack: f64::INFINITY, passed: true }
    }

    fn record(&mut self, slack: f64) {
        self.instances += 1;
        self.worst_slack = self.worst_slack.min(slack);
        self.passed &= slack >= 0.0;
    }
}

/// A randomized quotient `w` with its sandwich.
#[derive(Debug, Clone)]
pub struct AdmissibleSample {
    pub exps: Exponents,
    pub w: RadialField,
    pub bounds: SandwichBounds,
}

#[derive(Debug, Clone, Copy)]
struct Bump {
    coeff: f64,
    center: f64,
    width: f64,
}

fn gaussian(r: f64, center: f64, width: f64) -> f64 {
    (-(r - center).powi(2) / (2.0 * width * width)).exp()
}

/// `w = 1 + a (1 + r^2)^{-1} b(r)` with `b` a random constant plus Gaussians, balanced
/// to zero relative mass against `V_{D*}`, and `a` scaled so that `W0 <= w <= W1`.
pub fn random_admissible(
    rng: &mut ChaCha8Rng,
    exps: &Exponents,
    grid: &Arc<RadialGrid>,
    dstar: f64,
) -> Result<AdmissibleSample> {
    let w0 = rng.random_range(0.9..0.995);
    let w1 = rng.random_range(1.005..1.1);
    let constant = rng.random_range(-1.0..1.0);
    let bumps: Vec<Bump> = (0..3)
        .map(|_| Bump {
            coeff: rng.random_range(-1.0..1.0),
            center: rng.random_range(0.0..4.0),
            width: rng.random_range(0.3..1.5),
        })
        .collect();
    let shape = |r: f64| constant + bumps.iter().map(|b| b.coeff * gaussian(r, b.center, b.width)).sum::<f64>();
    let (bal_c, bal_w) = (6.0, 1.0);
    let d = exps.dim();
    let moment = |f: &dyn Fn(f64) -> f64| {
        let dens = |r: f64| f(r) / (1.0 + r * r) * barenblatt_profile(exps, dstar, r) * r.powf(d - 1.0);
        adaptive(dens, 0.0, 40.0, 1e-13).0 + adaptive_log(dens, 40.0, 1e12, 1e-13).0
    };
    let k = if exps.above_m_star() {
        moment(&shape) / moment(&|r| gaussian(r, bal_c, bal_w))
    } else {
        0.0
    };
    let profile = |r: f64| (shape(r) - k * gaussian(r, bal_c, bal_w)) / (1.0 + r * r);
    let phi = RadialField::from_fn(grid.clone(), profile);
    let (lo, hi) = (phi.min(), phi.max());
    let room_lo = if lo < 0.0 { (1.0 - w0) / -lo } else { f64::INFINITY };
    let room_hi = if hi > 0.0 { (w1 - 1.0) / hi } else { f64::INFINITY };
    let room = room_lo.min(room_hi);
    if !room.is_finite() {
        return Err(FadeError::domain("degenerate random profile"));
    }
    let a = rng.random_range(0.2..1.0) * room;
    let w = phi.map(|x| 1.0 + a * x);
    let bounds = SandwichBounds::from_quotient_bounds(w0, w1, dstar, exps)?;
    Ok(AdmissibleSample { exps: *exps, w, bounds })
}

/// Margins of the four functional inequalities on one sample; `gamma` only when certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMargins {
    pub sandwich: f64,
    pub fisher_domination: f64,
    pub moment: f64,
    pub entropy_production: Option<f64>,
}

pub fn sample_margins(sample: &AdmissibleSample, c_md: f64, theta: f64) -> Result<SampleMargins> {
    let (exps, w, b) = (&sample.exps, &sample.w, &sample.bounds);
    let f = relative_entropy(w, b, exps)?;
    let (lo, hi) = entropy_equivalence_bounds(w, b, exps)?;
    let allow = f.error + lo.error + hi.error + 1e-12 * f.value.abs();
    let sandwich = (f.value - lo.value).min(hi.value - f.value) + allow;

    let g = linearization_variable(w, b.dstar, exps);
    let i_lin = linearized_fisher(&g, b.dstar, exps)?;
    let e_lin = linearized_entropy(&g, b.dstar, exps)?;
    let i = relative_fisher(w, b, exps)?;
    let (beta1, beta2) = beta_constants(b, exps);
    let fisher_domination = beta1 * i.value + beta2 * e_lin.value - i_lin.value
        + i_lin.error
        + beta1 * i.error
        + beta2 * e_lin.error
        + 1e-8;

    let mom = moment_norm(w, b, exps, theta)?;
    let moment = mom.bound - mom.norm + mom.error + 1e-8;

    let entropy_production = gamma_rate(b, exps, c_md)
        .map(|gamma| i.value - gamma * f.value + i.error + gamma * f.error + 1e-12 * i.value.abs());
    Ok(SampleMargins { sandwich, fisher_domination, moment, entropy_production })
}

/// The four randomized suites over `samples` draws, cycling through [`FAMILY_POINTS`].
pub fn randomized_suites(seed: u64, samples: usize) -> Result<Vec<SuiteReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = [
        SuiteReport::new("entropy_sandwich"),
        SuiteReport::new("fisher_domination"),
        SuiteReport::new("moment_bound"),
        SuiteReport::new("entropy_production"),
    ];
    let mut constants: HashMap<u32, (Exponents, Arc<RadialGrid>, f64)> = HashMap::new();
    for s in 0..samples {
        let (m, d) = FAMILY_POINTS[s % FAMILY_POINTS.len()];
        if let std::collections::hash_map::Entry::Vacant(slot) = constants.entry(d) {
            let exps = Exponents::new(m, d)?;
            let grid = Arc::new(RadialGrid::graded(d, FAMILY_R_MAX, 2048)?);
            let c_md = m / predicted_lambda(&exps)?;
            slot.insert((exps, grid, c_md));
        }
        let (exps, grid, c_md) = &constants[&d];
        let sample = random_admissible(&mut rng, exps, grid, 1.0)?;
        let beta = (2.0 - m) / (1.0 - m);
        let theta = rng.random_range(0.0..0.9 * beta);
        let margins = sample_margins(&sample, *c_md, theta)?;
        reports[0].record(margins.sandwich);
        reports[1].record(margins.fisher_domination);
        reports[2].record(margins.moment);
        if let Some(x) = margins.entropy_production {
            reports[3].record(x);
        }
    }
    Ok(reports.to_vec())
}

/// Hardy test quotients decrease in `eps` and end within 2% of `1/kappa_alpha`.
pub fn hardy_witness_suite() -> Result<SuiteReport> {
    let mut report = SuiteReport::new("hardy_witness");
    let eps = [1e-1, 1e-2, 1e-4, 1e-8, 1e-16, 1e-32, 1e-64];
    for (alpha, d) in [(0.0, 3u32), (-2.0, 5)] {
        let target = 1.0 / hardy_constant(alpha, d)?;
        let q = eps.iter().map(|&e| hardy_test_quotient(alpha, d, e)).collect::<Result<Vec<f64>>>()?;
        let monotone = q.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
        let closeness = 0.02 - (q[q.len() - 1] / target - 1.0).abs();
        report.record(monotone.min(closeness));
    }
    Ok(report)
}

/// All suites of the default verification run.
pub fn run_all(seed: u64, samples: usize) -> Result<Vec<SuiteReport>> {
    let mut reports = randomized_suites(seed, samples)?;
    reports.push(hardy_witness_suite()?);
    Ok(reports)
}
