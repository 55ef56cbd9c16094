//! The experiments behind the `fade` binary. Each command returns its CSV
//! files as strings so that output is byte-reproducible and testable.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::grid::{RadialField, RadialGrid};
use crate::profiles::barenblatt_profile;
use crate::rates::{default_fit_window, entropy_series, fit_exponential, predict_rates, sharp_rate_envelope};
use crate::solver::{prepare_initial, simulate, Trajectory};
use crate::spectral::{default_spectral_grid, rayleigh_gap};
use crate::verify::run_all;

/// Slack on `log F` allowed by the Gronwall envelope check.
pub const ENVELOPE_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    /// `(file name, contents)` pairs.
    pub files: Vec<(String, String)>,
    /// Short human-readable summary.
    pub summary: String,
    pub passed: bool,
}

/// Fixed 17-significant-digit formatting.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn header(cmd: &str, cfg: &ExperimentConfig, columns: &str) -> String {
    format!(
        "# fade {cmd}\n# experiment = {}\n# seed = {}\n# config_sha256 = {}\n{columns}\n",
        cfg.name,
        cfg.seed,
        cfg.hash()
    )
}

fn status(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

fn dstar_or_default(cfg: &ExperimentConfig) -> f64 {
    cfg.dstar.unwrap_or(1.0)
}

fn simulation_grid(cfg: &ExperimentConfig) -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(RadialGrid::graded(cfg.d, cfg.r_max, cfg.intervals)?))
}

/// `V_{D*}(r)` on the configured grid plus the exponent table.
pub fn cmd_profile(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let exps = cfg.exponents()?;
    let grid = simulation_grid(cfg)?;
    let dstar = dstar_or_default(cfg);
    let field = RadialField::from_fn(grid, |r| barenblatt_profile(&exps, dstar, r));
    let mut profile = header("profile", cfg, "r,V");
    for (r, v) in field.grid().nodes().iter().zip(field.values()) {
        let _ = writeln!(profile, "{},{}", fmt_num(*r), fmt_num(*v));
    }
    let mut table = header("profile", cfg, "name,value");
    for (name, value) in [
        ("m", exps.m),
        ("d", exps.dim()),
        ("m_c", exps.m_c),
        ("m_star", exps.m_star),
        ("m_1", exps.m_1),
        ("m_0", exps.m_0),
        ("p_star", exps.p_star),
        ("p_of_m", exps.p_of_m),
        ("q_star", exps.q_star),
        ("profile_coefficient", exps.profile_coefficient()),
    ] {
        let _ = writeln!(table, "{name},{}", fmt_num(value));
    }
    let _ = writeln!(table, "# regime = {}", exps.regime().name());
    Ok(CommandOutput {
        files: vec![("profile.csv".into(), profile), ("exponents.csv".into(), table)],
        summary: format!("profile V_D with D = {dstar} on {} nodes ({})", field.values().len(), exps.regime().name()),
        passed: true,
    })
}

/// One spectral row per configured profile scale.
pub fn cmd_gap(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let exps = cfg.exponents()?;
    let grid = default_spectral_grid(cfg.d, cfg.spectral_refinement)?;
    let mut out = header(
        "gap",
        cfg,
        "m,d,D,lambda_est,lambda_err,C_est,C_exact,K_eta,eta,lower,upper,contained,method",
    );
    let mut passed = true;
    let mut summary = String::new();
    for &scale in &cfg.scales {
        let res = rayleigh_gap(&exps, scale, &grid)?;
        let contained = res.within_envelope();
        passed &= contained;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_num(exps.m),
            exps.d,
            fmt_num(scale),
            fmt_num(res.lambda_est),
            fmt_num(res.lambda_err),
            fmt_num(res.c_est),
            fmt_opt(res.c_exact),
            fmt_opt(res.k_eta),
            fmt_opt(res.eta),
            fmt_num(res.lower_bound),
            fmt_opt(res.upper_bound),
            status(contained),
            res.method_tags.join("+")
        );
        let _ = writeln!(summary, "D = {scale}: lambda = {:.6}, C = {:.6}, {}", res.lambda_est, res.c_est, status(contained));
    }
    Ok(CommandOutput { files: vec![("gap.csv".into(), out)], summary, passed })
}

/// Runs the configured simulation.
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<Trajectory> {
    let exps = cfg.exponents()?;
    let grid = simulation_grid(cfg)?;
    let data = prepare_initial(cfg.initial, &exps, grid, cfg.dstar)?;
    simulate(&data.w0, &data.bounds, &exps, &cfg.solver)
}

fn trajectory_csv(cfg: &ExperimentConfig, traj: &Trajectory) -> String {
    let mut out = header("simulate", cfg, "t,F,I,E_lin,I_lin,rel_mass,w_min,w_max");
    for r in &traj.reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_num(r.t),
            fmt_num(r.entropy),
            fmt_num(r.fisher),
            fmt_num(r.e_lin),
            fmt_num(r.i_lin),
            fmt_num(r.rel_mass),
            fmt_num(r.w_min),
            fmt_num(r.w_max)
        );
    }
    out
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let traj = run_simulation(cfg)?;
    let last = traj.reports.last().copied();
    let summary = format!(
        "{} steps, {} Newton iterations, {} rejected; D* = {}; final F = {:e}",
        traj.steps,
        traj.newton_iterations,
        traj.rejected_steps,
        traj.bounds.dstar,
        last.map_or(f64::NAN, |r| r.entropy)
    );
    Ok(CommandOutput { files: vec![("trajectory.csv".into(), trajectory_csv(cfg, &traj))], summary, passed: true })
}

/// Predicted exponents against the fitted entropy decay of the configured run.
pub fn cmd_rates(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let exps = cfg.exponents()?;
    let grid = default_spectral_grid(cfg.d, cfg.spectral_refinement)?;
    let spectral = rayleigh_gap(&exps, 1.0, &grid)?;
    let traj = run_simulation(cfg)?;
    let pred = predict_rates(&exps, &spectral, &traj.bounds)?;
    let window = default_fit_window(&traj)?;
    let fit = fit_exponential(&entropy_series(&traj), window)?;
    let env = sharp_rate_envelope(&traj, &exps, &spectral)?;
    let observed = -fit.slope;
    let rel = observed / pred.rate_f - 1.0;
    let rate_ok = rel.abs() <= cfg.rate_tolerance;
    let worst = env.worst_pair(ENVELOPE_SLACK);
    let env_ok = worst <= 0.0;

    let mut out = header("rates", cfg, "quantity,predicted,observed,relative_error,status");
    let _ = writeln!(out, "rate_F,{},{},{},{}", fmt_num(pred.rate_f), fmt_num(observed), fmt_num(rel), status(rate_ok));
    let _ = writeln!(out, "gronwall_envelope,{},{},,{}", fmt_num(0.0), fmt_num(worst), status(env_ok));
    let _ = writeln!(out, "fit_window_start,,{},,", fmt_num(window.0));
    let _ = writeln!(out, "fit_window_end,,{},,", fmt_num(window.1));
    let _ = writeln!(out, "fit_residual,,{},,", fmt_num(fit.residual));
    let _ = writeln!(out, "lambda,{},,,", fmt_num(pred.lambda));
    let _ = writeln!(out, "gamma_nl,{},,,", fmt_opt(pred.gamma_nl));
    let _ = writeln!(out, "rate_L2,{},,,", fmt_opt(pred.rate_lq(2.0)));
    let _ = writeln!(out, "alpha_original_L2,{},,,", fmt_opt(pred.alpha_original(2.0)));
    let _ = writeln!(out, "rate_C0,{},,,", fmt_num(pred.rate_cj(0)));
    let _ = writeln!(out, "rate_C1,{},,,", fmt_num(pred.rate_cj(1)));
    let _ = writeln!(out, "rate_relerr_inf,{},,,", fmt_num(pred.rate_relerr(f64::INFINITY)));
    let _ = writeln!(out, "gamma_of_q_inf,{},,,", fmt_opt(pred.gamma_of_q(f64::INFINITY)));

    let summary = format!(
        "2 lambda = {:.6}, fitted {:.6} ({:+.2}%), envelope worst {:.3e}",
        pred.rate_f,
        observed,
        100.0 * rel,
        worst
    );
    Ok(CommandOutput {
        files: vec![("rates.csv".into(), out), ("trajectory.csv".into(), trajectory_csv(cfg, &traj))],
        summary,
        passed: rate_ok && env_ok,
    })
}

/// One line per suite: name, instances, worst slack, status.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let reports = run_all(cfg.seed, cfg.samples)?;
    let mut out = header("verify", cfg, "suite,instances,worst_slack,status");
    for r in &reports {
        let _ = writeln!(out, "{},{},{},{}", r.name, r.instances, fmt_num(r.worst_slack), status(r.passed));
    }
    let passed = reports.iter().all(|r| r.passed);
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    let summary = if passed {
        format!("{} suites passed", reports.len())
    } else {
        format!("failed suites: {}", failed.join(", "))
    };
    Ok(CommandOutput { files: vec![("verify.csv".into(), out)], summary, passed })
}
