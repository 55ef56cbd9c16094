//! C ABI over `fade-core`.
//!
//! Every entry point returns a [`FadeStatus`]; results are written through out
//! pointers. After a non-`Ok` status the message is available from
//! [`fade_last_error_message`] on the same thread. Simulations live behind the
//! opaque [`FadeSimulation`] handle, released with [`fade_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fade_core::cli::cmd_verify;
use fade_core::config::ExperimentConfig;
use fade_core::functionals::EntropyReport;
use fade_core::profiles::{barenblatt_profile, Exponents};
use fade_core::solver::Trajectory;
use fade_core::spectral::{exact_gap_subcritical, hardy_constant, predicted_lambda};
use fade_core::{cli, FadeError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadeStatus {
    Ok = 0,
    /// A check ran and failed (verification only).
    CheckFailed = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NonConvergence = 4,
    SandwichViolation = 5,
    IoError = 6,
    NullPointer = 7,
    Panic = 8,
}

/// Exponents derived from `(m, d)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FadeExponents {
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

/// Diagnostics at one stored time of a simulation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FadeReport {
    pub t: f64,
    pub entropy: f64,
    pub fisher: f64,
    pub e_lin: f64,
    pub i_lin: f64,
    pub rel_mass: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl From<&EntropyReport> for FadeReport {
    fn from(r: &EntropyReport) -> Self {
        Self {
            t: r.t,
            entropy: r.entropy,
            fisher: r.fisher,
            e_lin: r.e_lin,
            i_lin: r.i_lin,
            rel_mass: r.rel_mass,
            w_min: r.w_min,
            w_max: r.w_max,
        }
    }
}

/// Opaque simulation handle.
pub struct FadeSimulation {
    config: ExperimentConfig,
    trajectory: Option<Trajectory>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &FadeError) -> FadeStatus {
    match err {
        FadeError::Config { .. } => FadeStatus::ConfigError,
        FadeError::Io(_) => FadeStatus::IoError,
        FadeError::SandwichViolation { .. } => FadeStatus::SandwichViolation,
        e if e.is_convergence_failure() => FadeStatus::NonConvergence,
        _ => FadeStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<FadeStatus, FadeError>) -> FadeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("panic inside fade-core".into());
            FadeStatus::Panic
        }
    }
}

fn null_error(what: &str) -> FadeStatus {
    set_error(format!("null pointer passed for {what}"));
    FadeStatus::NullPointer
}

unsafe fn config_from_text(text: *const c_char) -> Result<ExperimentConfig, FadeError> {
    let s = CStr::from_ptr(text)
        .to_str()
        .map_err(|_| FadeError::Config { line: 0, message: "config is not valid UTF-8".into() })?;
    ExperimentConfig::parse(s)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated
/// to `len`). Returns the full message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn fade_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// # Safety
/// `out` must be null or point to writable memory for one `FadeExponents`.
#[no_mangle]
pub unsafe extern "C" fn fade_exponents(m: f64, d: u32, out: *mut FadeExponents) -> FadeStatus {
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        let e = Exponents::new(m, d)?;
        *out = FadeExponents {
            m: e.m,
            d: e.d,
            m_c: e.m_c,
            m_star: e.m_star,
            m_1: e.m_1,
            m_0: e.m_0,
            p_star: e.p_star,
            p_of_m: e.p_of_m,
            q_star: e.q_star,
        };
        Ok(FadeStatus::Ok)
    })
}

/// `V_D(r) = (D + (1-m)/(2m) r^2)^{-1/(1-m)}`.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn fade_barenblatt_profile(m: f64, d: u32, scale: f64, r: f64, out: *mut f64) -> FadeStatus {
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        let e = Exponents::new(m, d)?;
        if scale.is_nan() || scale <= 0.0 || r.is_nan() || r < 0.0 {
            return Err(FadeError::domain("need D > 0 and r >= 0"));
        }
        *out = barenblatt_profile(&e, scale, r);
        Ok(FadeStatus::Ok)
    })
}

/// Closed-form Hardy-Poincaré constant for `d >= 5`, `m < m_*`.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn fade_exact_gap_subcritical(m: f64, d: u32, out: *mut f64) -> FadeStatus {
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        *out = exact_gap_subcritical(&Exponents::new(m, d)?)?;
        Ok(FadeStatus::Ok)
    })
}

/// Weighted Hardy constant `4 / (d + 2 alpha - 2)^2`.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn fade_hardy_constant(alpha: f64, d: u32, out: *mut f64) -> FadeStatus {
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        *out = hardy_constant(alpha, d)?;
        Ok(FadeStatus::Ok)
    })
}

/// The spectral gap `lambda_{m,d}`.
///
/// # Safety
/// `out` must be null or point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn fade_predicted_lambda(m: f64, d: u32, out: *mut f64) -> FadeStatus {
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        *out = predicted_lambda(&Exponents::new(m, d)?)?;
        Ok(FadeStatus::Ok)
    })
}

/// Parses a configuration and creates a simulation handle (not yet run).
///
/// # Safety
/// `config_text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fade_simulation_new(config_text: *const c_char, out: *mut *mut FadeSimulation) -> FadeStatus {
    if config_text.is_null() {
        return null_error("config_text");
    }
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        let config = config_from_text(config_text)?;
        *out = Box::into_raw(Box::new(FadeSimulation { config, trajectory: None }));
        Ok(FadeStatus::Ok)
    })
}

/// Runs the simulation described by the handle's configuration.
///
/// # Safety
/// `sim` must come from [`fade_simulation_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fade_simulation_run(sim: *mut FadeSimulation) -> FadeStatus {
    let Some(sim) = sim.as_mut() else {
        return null_error("sim");
    };
    guard(|| {
        sim.trajectory = Some(cli::run_simulation(&sim.config)?);
        Ok(FadeStatus::Ok)
    })
}

/// Number of stored diagnostics (0 before a successful run).
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fade_simulation_report_count(sim: *const FadeSimulation) -> usize {
    sim.as_ref().and_then(|s| s.trajectory.as_ref()).map_or(0, |t| t.reports.len())
}

/// Copies diagnostic `index` into `out`.
///
/// # Safety
/// `sim` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fade_simulation_report(
    sim: *const FadeSimulation,
    index: usize,
    out: *mut FadeReport,
) -> FadeStatus {
    let Some(sim) = sim.as_ref() else {
        return null_error("sim");
    };
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        let traj = sim
            .trajectory
            .as_ref()
            .ok_or_else(|| FadeError::domain("simulation has not been run"))?;
        let rep = traj
            .reports
            .get(index)
            .ok_or_else(|| FadeError::domain(format!("report index {index} out of range")))?;
        *out = FadeReport::from(rep);
        Ok(FadeStatus::Ok)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sim` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn fade_simulation_free(sim: *mut FadeSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs the verification suites; `CheckFailed` when any suite fails.
///
/// # Safety
/// `config_text` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fade_verify(config_text: *const c_char, seed: u64) -> FadeStatus {
    if config_text.is_null() {
        return null_error("config_text");
    }
    guard(|| {
        let mut config = config_from_text(config_text)?;
        config.seed = seed;
        let out = cmd_verify(&config)?;
        if out.passed {
            Ok(FadeStatus::Ok)
        } else {
            set_error(out.summary);
            Ok(FadeStatus::CheckFailed)
        }
    })
}
