//! One PASS/FAIL line per acceptance criterion; exits non-zero when any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use fade_core::cli::{cmd_verify, ENVELOPE_SLACK};
use fade_core::config::ExperimentConfig;
use fade_core::grid::RadialGrid;
use fade_core::profiles::Exponents;
use fade_core::rates::{default_fit_window, entropy_series, fit_exponential, sharp_rate_envelope};
use fade_core::solver::*;
use fade_core::spectral::*;
use fade_core::verify::{hardy_witness_suite, randomized_suites};
use fade_core::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn exps(m: f64, d: u32) -> Exponents {
    Exponents::new(m, d).expect("valid exponents")
}

fn grid(d: u32, r_max: f64, n: usize) -> Arc<RadialGrid> {
    Arc::new(RadialGrid::graded(d, r_max, n).expect("valid grid"))
}

fn exact_constant() -> Result<Outcome> {
    let e = exps(0.2, 5);
    let exact = exact_gap_subcritical(&e)?;
    let c1 = spectral_report(&e, 1)?.c_est;
    let c4 = spectral_report(&e, 4)?.c_est;
    let (r1, r4) = ((c1 - 8.0).abs() / 8.0, (c4 - 8.0).abs() / 8.0);
    Ok(Outcome {
        passed: exact == 8.0 && r1 <= 0.05 && r4 <= 0.01,
        detail: format!("exact = {exact:?}, C_est = {c1:.5} ({:.2}%), 4x refined {c4:.5} ({:.2}%)", 100.0 * r1, 100.0 * r4),
    })
}

fn two_sided_envelope() -> Result<Outcome> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (m, d) in [(0.5, 3u32), (0.45, 4), (0.55, 5), (0.6, 5)] {
        let e = exps(m, d);
        let res = spectral_report(&e, 1)?;
        let contained = res.within_envelope();
        let k_slack = res.k_eta.map(|k| k_bound_displayed(&e) - k);
        let ok = contained && k_slack.is_some_and(|s| s > 0.0);
        passed &= ok;
        parts.push(format!(
            "({m}, {d}) {:.4} <= {:.4} <= {:.4}{} K slack {:.3}",
            res.lower_bound,
            res.c_est,
            res.upper_bound.unwrap_or(f64::NAN),
            if contained { "" } else { " violated," },
            k_slack.unwrap_or(f64::NAN)
        ));
    }
    Ok(Outcome { passed, detail: parts.join("; ") })
}

fn scale_independence() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for (m, d) in [(0.5, 3u32), (0.45, 4), (0.55, 5), (0.6, 5), (0.2, 5)] {
        let e = exps(m, d);
        let g = default_spectral_grid(d, 1)?;
        let l: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&s| rayleigh_gap(&e, s, &g).map(|r| r.lambda_est)).collect::<Result<_>>()?;
        let spread = l.iter().map(|x| (x - l[1]).abs() / l[1]).fold(0.0, f64::max);
        worst = worst.max(spread);
    }
    Ok(Outcome { passed: worst <= 0.01, detail: format!("largest relative spread {worst:.2e} over 5 cases") })
}

fn hardy_optimality() -> Result<Outcome> {
    let r = hardy_witness_suite()?;
    Ok(Outcome { passed: r.passed, detail: format!("{} cases, worst slack {:.3e}", r.instances, r.worst_slack) })
}

fn default_runs() -> Result<(Trajectory, Trajectory)> {
    let e = exps(0.5, 3);
    let run = |n: usize, r_max: f64, dt: f64| -> Result<Trajectory> {
        let data = prepare_initial(InitialData::Mixture { d0: 2.0, d1: 0.5, weight: 0.5 }, &e, grid(3, r_max, n), None)?;
        let cfg = SolverConfig { dt, diag_every: (0.5 / dt).round() as usize, ..SolverConfig::default() };
        simulate(&data.w0, &data.bounds, &e, &cfg)
    };
    Ok((run(2048, 1e3, 2e-3)?, run(4096, 2e3, 1e-3)?))
}

fn production_identity(runs: &(Trajectory, Trajectory)) -> Outcome {
    let worst = |t: &Trajectory| entropy_production_residual(t).into_iter().fold(0.0, f64::max);
    let (a, b) = (worst(&runs.0), worst(&runs.1));
    Outcome {
        passed: a <= 5e-3 && a / b >= 1.8,
        detail: format!("residual {a:.3e}, refined {b:.3e} (factor {:.2})", a / b),
    }
}

fn mass_conservation(runs: &(Trajectory, Trajectory)) -> Outcome {
    let rel = |t: &Trajectory| discrete_mass_drift(t) / (1.0 + t.reports[0].rel_mass.abs());
    let (a, b) = (rel(&runs.0), rel(&runs.1));
    Outcome {
        passed: a <= 1e-6 && a / b >= 4.0,
        detail: format!("drift {a:.3e}, refined {b:.3e} (factor {:.1})", a / b),
    }
}

fn comparison() -> Result<Outcome> {
    let cfg = SolverConfig { dt: 0.01, t_end: 20.0, diag_every: 50, ..SolverConfig::default() };
    let pairs = [
        (0.5, 3u32, InitialData::Mixture { d0: 2.0, d1: 0.5, weight: 0.7 }, InitialData::Mixture { d0: 2.0, d1: 0.5, weight: 0.3 }),
        (0.5, 3, InitialData::Barenblatt { scale: 1.5 }, InitialData::Barenblatt { scale: 0.8 }),
        (0.45, 4, InitialData::Mixture { d0: 2.0, d1: 0.5, weight: 0.6 }, InitialData::Mixture { d0: 2.0, d1: 0.5, weight: 0.4 }),
    ];
    let mut worst: f64 = 0.0;
    for (m, d, lower, upper) in pairs {
        let e = exps(m, d);
        let g = grid(d, 1e3, 1024);
        let a = prepare_initial(lower, &e, g.clone(), Some(1.0))?;
        let b = prepare_initial(upper, &e, g, Some(1.0))?;
        let initial = a.w0.zip_with(&b.w0, |p, q| (p - q).max(0.0)).max_abs();
        assert_eq!(initial, 0.0, "initial data must be ordered");
        let ta = simulate(&a.w0, &a.bounds, &e, &cfg)?;
        let tb = simulate(&b.w0, &b.bounds, &e, &cfg)?;
        for (x, y) in ta.fields.iter().zip(&tb.fields) {
            worst = worst.max(x.zip_with(y, |p, q| (p - q).max(0.0)).max_abs());
        }
    }
    Ok(Outcome { passed: worst <= 1e-10, detail: format!("largest order violation {worst:.3e} over 3 pairs") })
}

fn rate_theorem() -> Result<Outcome> {
    let mut passed = true;
    let mut parts = Vec::new();
    for (m, d, t_end) in [(0.5, 3u32, 40.0), (0.55, 5, 160.0)] {
        let e = exps(m, d);
        let spec = spectral_report(&e, 1)?;
        let data = prepare_initial(InitialData::Bump { amplitude: 1e-2, center: 1.0, width: 0.5 }, &e, grid(d, 1e10, 3000), None)?;
        let cfg = SolverConfig { dt: 0.1, t_end, diag_every: 5, ..SolverConfig::default() };
        let tr = simulate(&data.w0, &data.bounds, &e, &cfg)?;
        let fit = fit_exponential(&entropy_series(&tr), default_fit_window(&tr)?)?;
        let rel = -fit.slope / (2.0 * spec.lambda_est) - 1.0;
        let worst = sharp_rate_envelope(&tr, &e, &spec)?.worst_pair(ENVELOPE_SLACK);
        passed &= rel.abs() <= 0.15 && worst <= 0.0;
        parts.push(format!("({m}, {d}) fitted {:.5} vs {:.5} ({:+.2}%), envelope {worst:.2e}", -fit.slope, 2.0 * spec.lambda_est, 100.0 * rel));
    }
    Ok(Outcome { passed, detail: parts.join("; ") })
}

fn randomized() -> Result<Outcome> {
    let reports = randomized_suites(ExperimentConfig::default().seed, 200)?;
    let passed = reports.iter().all(|r| r.passed) && reports[..3].iter().all(|r| r.instances == 200);
    let detail = reports.iter().map(|r| format!("{} {}/{:.2e}", r.name, r.instances, r.worst_slack)).collect::<Vec<_>>().join(", ");
    Ok(Outcome { passed, detail })
}

fn determinism() -> Result<Outcome> {
    let cfg = ExperimentConfig::default();
    let a = cmd_verify(&cfg)?;
    let b = cmd_verify(&cfg)?;
    Ok(Outcome { passed: a.files == b.files, detail: format!("{} bytes compared", a.files[0].1.len()) })
}

/// `shared` is time already spent on runs this criterion reuses.
fn report(n: usize, name: &str, limit: f64, shared: f64, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let out = f();
    let secs = shared + start.elapsed().as_secs_f64();
    let (passed, detail) = match out {
        Ok(o) => (o.passed && secs <= limit, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!("criterion {n:>2} {}: {name}: {detail} [{secs:.1} s]", if passed { "PASS" } else { "FAIL" });
    passed
}

fn main() -> ExitCode {
    let mut all = true;
    all &= report(1, "exact subcritical constant", 10.0, 0.0, exact_constant);
    all &= report(2, "two-sided envelope", 30.0, 0.0, two_sided_envelope);
    all &= report(3, "scale independence", 30.0, 0.0, scale_independence);
    all &= report(4, "Hardy optimality", 10.0, 0.0, hardy_optimality);
    let start = Instant::now();
    let runs = default_runs();
    let shared = start.elapsed().as_secs_f64();
    match runs {
        Ok(runs) => {
            all &= report(5, "entropy production identity", 120.0, shared, || Ok(production_identity(&runs)));
            all &= report(6, "relative mass conservation", 120.0, shared, || Ok(mass_conservation(&runs)));
        }
        Err(e) => {
            println!("criterion  5 FAIL: entropy production identity: error: {e}");
            println!("criterion  6 FAIL: relative mass conservation: error: {e}");
            all = false;
        }
    }
    all &= report(7, "comparison principle", 120.0, 0.0, comparison);
    all &= report(8, "rate theorem", 180.0, 0.0, rate_theorem);
    all &= report(9, "randomized functional inequalities", 120.0, 0.0, randomized);
    all &= report(10, "determinism", 60.0, 0.0, determinism);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
