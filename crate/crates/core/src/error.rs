use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FadeError {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("time {tau} lies outside the existence interval of the {regime} branch")]
    Existence { regime: &'static str, tau: f64 },

    #[error("integrand tail decays like r^{exponent:.6} and is not integrable")]
    DivergentTail { exponent: f64 },

    #[error("Hardy constant is singular at alpha = {alpha} for d = {d}")]
    SingularHardy { alpha: f64, d: u32 },

    #[error("weight is not integrable for m = {m}, d = {d}: {what}")]
    NonIntegrableWeight { m: f64, d: u32, what: &'static str },

    #[error("quotient leaves the sandwich [{w0}, {w1}]: observed [{lo}, {hi}]")]
    SandwichViolation { w0: f64, w1: f64, lo: f64, hi: f64 },

    #[error("Newton iteration failed at t = {t} (residual {residual:e})")]
    NewtonDivergence { t: f64, residual: f64 },

    #[error("eigenvalue iteration did not converge: {0}")]
    EigenNonConvergence(String),

    #[error("not enough data points: {0}")]
    InsufficientData(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl FadeError {
    pub fn domain(msg: impl Into<String>) -> Self {
        FadeError::Domain(msg.into())
    }

    /// True for failures of an iterative numerical method, as opposed to bad input.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            FadeError::NewtonDivergence { .. } | FadeError::EigenNonConvergence(_)
        )
    }

    /// Process exit code: 3 for numerical non-convergence, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.is_convergence_failure() {
            3
        } else {
            2
        }
    }
}

impl From<std::io::Error> for FadeError {
    fn from(e: std::io::Error) -> Self {
        FadeError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FadeError>;
