//! Experiment configuration: `key = value` lines under `[section]` headers.
//!
//! Unknown sections and keys are rejected with their line number. The
//! canonical dump lists every key and re-parses to an identical value.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{FadeError, Result};
use crate::profiles::Exponents;
use crate::solver::{InitialData, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub out: PathBuf,
    pub m: f64,
    pub d: u32,
    pub d0: f64,
    pub d1: f64,
    /// Chosen by zero relative mass when absent.
    pub dstar: Option<f64>,
    pub r_max: f64,
    pub intervals: usize,
    pub solver: SolverConfig,
    pub initial: InitialData,
    pub spectral_refinement: usize,
    pub scales: Vec<f64>,
    pub rate_tolerance: f64,
    pub samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "default".into(),
            seed: 20_061_212,
            out: PathBuf::from("out"),
            m: 0.5,
            d: 3,
            d0: 2.0,
            d1: 0.5,
            dstar: None,
            r_max: 1e3,
            intervals: 2048,
            solver: SolverConfig::default(),
            initial: InitialData::Mixture { d0: 2.0, d1: 0.5, weight: 0.5 },
            spectral_refinement: 1,
            scales: vec![0.5, 1.0, 2.0],
            rate_tolerance: 0.15,
            samples: 200,
        }
    }
}

fn config_err(line: usize, message: impl Into<String>) -> FadeError {
    FadeError::Config { line, message: message.into() }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_err(line, format!("cannot parse `{value}` for key `{key}`")))
}

/// Raw values of the initial-data keys before they are combined.
#[derive(Default)]
struct InitialKeys {
    kind: Option<(usize, String)>,
    weight: Option<f64>,
    amplitude: Option<f64>,
    center: Option<f64>,
    width: Option<f64>,
    scale: Option<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut init = InitialKeys::default();
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| config_err(line, "unterminated section header"))?
                    .trim();
                if !["experiment", "model", "grid", "solver", "initial", "spectral", "rates", "verify"].contains(&name) {
                    return Err(config_err(line, format!("unknown section `{name}`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match (section.as_str(), key) {
                ("experiment", "name") => cfg.name = value.to_string(),
                ("experiment", "seed") => cfg.seed = parse_num(line, key, value)?,
                ("experiment", "out") => cfg.out = PathBuf::from(value),
                ("model", "m") => cfg.m = parse_num(line, key, value)?,
                ("model", "d") => cfg.d = parse_num(line, key, value)?,
                ("model", "d0") => cfg.d0 = parse_num(line, key, value)?,
                ("model", "d1") => cfg.d1 = parse_num(line, key, value)?,
                ("model", "dstar") => {
                    cfg.dstar = if value == "auto" { None } else { Some(parse_num(line, key, value)?) }
                }
                ("grid", "r_max") => cfg.r_max = parse_num(line, key, value)?,
                ("grid", "intervals") => cfg.intervals = parse_num(line, key, value)?,
                ("solver", "dt") => cfg.solver.dt = parse_num(line, key, value)?,
                ("solver", "t_end") => cfg.solver.t_end = parse_num(line, key, value)?,
                ("solver", "newton_tol") => cfg.solver.newton_tol = parse_num(line, key, value)?,
                ("solver", "newton_max_iter") => cfg.solver.newton_max_iter = parse_num(line, key, value)?,
                ("solver", "theta") => cfg.solver.theta = parse_num(line, key, value)?,
                ("solver", "diag_every") => cfg.solver.diag_every = parse_num(line, key, value)?,
                ("initial", "kind") => init.kind = Some((line, value.to_string())),
                ("initial", "weight") => init.weight = Some(parse_num(line, key, value)?),
                ("initial", "amplitude") => init.amplitude = Some(parse_num(line, key, value)?),
                ("initial", "center") => init.center = Some(parse_num(line, key, value)?),
                ("initial", "width") => init.width = Some(parse_num(line, key, value)?),
                ("initial", "scale") => init.scale = Some(parse_num(line, key, value)?),
                ("spectral", "refinement") => cfg.spectral_refinement = parse_num(line, key, value)?,
                ("spectral", "scales") => {
                    cfg.scales = value
                        .split(',')
                        .map(|s| parse_num(line, key, s.trim()))
                        .collect::<Result<Vec<f64>>>()?
                }
                ("rates", "tolerance") => cfg.rate_tolerance = parse_num(line, key, value)?,
                ("verify", "samples") => cfg.samples = parse_num(line, key, value)?,
                ("", _) => return Err(config_err(line, format!("key `{key}` outside of any section"))),
                (s, k) => return Err(config_err(line, format!("unknown key `{k}` in section `{s}`"))),
            }
        }
        cfg.initial = resolve_initial(&cfg, init)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FadeError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn exponents(&self) -> Result<Exponents> {
        Exponents::new(self.m, self.d)
    }

    /// Re-checks every module precondition that depends only on the configuration.
    pub fn validate(&self) -> Result<()> {
        let exps = self.exponents()?;
        self.solver.validate()?;
        if !(self.d1 > 0.0 && self.d1 <= self.d0 && self.d0.is_finite()) {
            return Err(FadeError::domain(format!("need 0 < d1 <= d0, got d1 = {}, d0 = {}", self.d1, self.d0)));
        }
        if let Some(ds) = self.dstar {
            if !(ds >= self.d1 && ds <= self.d0) {
                return Err(FadeError::domain(format!("dstar = {ds} must lie in [d1, d0]")));
            }
        }
        if self.dstar.is_none() && !exps.above_m_star() && matches!(self.initial, InitialData::Mixture { .. }) {
            return Err(FadeError::domain("dstar = auto needs m > m_*; give dstar explicitly"));
        }
        if !(self.r_max > 0.0) || self.intervals == 0 {
            return Err(FadeError::domain("grid needs r_max > 0 and intervals > 0"));
        }
        if self.spectral_refinement == 0 {
            return Err(FadeError::domain("spectral refinement must be at least 1"));
        }
        if self.scales.is_empty() || self.scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(FadeError::domain("spectral scales must be positive"));
        }
        if !(self.rate_tolerance > 0.0) {
            return Err(FadeError::domain("rate tolerance must be positive"));
        }
        Ok(())
    }

    /// Canonical text form; parsing it yields an identical configuration.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[experiment]\nname = {}\nseed = {}\nout = {}", self.name, self.seed, self.out.display());
        let dstar = self.dstar.map_or("auto".to_string(), |v| format!("{v:?}"));
        let _ = writeln!(
            s,
            "\n[model]\nm = {:?}\nd = {}\nd0 = {:?}\nd1 = {:?}\ndstar = {}",
            self.m, self.d, self.d0, self.d1, dstar
        );
        let _ = writeln!(s, "\n[grid]\nr_max = {:?}\nintervals = {}", self.r_max, self.intervals);
        let c = &self.solver;
        let _ = writeln!(
            s,
            "\n[solver]\ndt = {:?}\nt_end = {:?}\nnewton_tol = {:?}\nnewton_max_iter = {}\ntheta = {:?}\ndiag_every = {}",
            c.dt, c.t_end, c.newton_tol, c.newton_max_iter, c.theta, c.diag_every
        );
        s.push_str("\n[initial]\n");
        match self.initial {
            InitialData::Equilibrium => s.push_str("kind = equilibrium\n"),
            InitialData::Barenblatt { scale } => {
                let _ = writeln!(s, "kind = barenblatt\nscale = {scale:?}");
            }
            InitialData::Mixture { weight, .. } => {
                let _ = writeln!(s, "kind = mixture\nweight = {weight:?}");
            }
            InitialData::Bump { amplitude, center, width } => {
                let _ = writeln!(s, "kind = bump\namplitude = {amplitude:?}\ncenter = {center:?}\nwidth = {width:?}");
            }
        }
        let scales: Vec<String> = self.scales.iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(s, "\n[spectral]\nrefinement = {}\nscales = {}", self.spectral_refinement, scales.join(", "));
        let _ = writeln!(s, "\n[rates]\ntolerance = {:?}", self.rate_tolerance);
        let _ = writeln!(s, "\n[verify]\nsamples = {}", self.samples);
        s
    }

    /// Hex SHA-256 of [`ExperimentConfig::dump`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.dump().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn resolve_initial(cfg: &ExperimentConfig, keys: InitialKeys) -> Result<InitialData> {
    let Some((line, kind)) = keys.kind else {
        return match cfg.initial {
            InitialData::Mixture { weight, .. } => Ok(InitialData::Mixture {
                d0: cfg.d0,
                d1: cfg.d1,
                weight: keys.weight.unwrap_or(weight),
            }),
            other => Ok(other),
        };
    };
    let reject = |name: &str, present: bool| -> Result<()> {
        if present {
            Err(config_err(line, format!("key `{name}` does not apply to initial kind `{kind}`")))
        } else {
            Ok(())
        }
    };
    match kind.as_str() {
        "equilibrium" => {
            reject("weight", keys.weight.is_some())?;
            reject("amplitude", keys.amplitude.is_some())?;
            reject("scale", keys.scale.is_some())?;
            Ok(InitialData::Equilibrium)
        }
        "barenblatt" => {
            reject("weight", keys.weight.is_some())?;
            reject("amplitude", keys.amplitude.is_some())?;
            Ok(InitialData::Barenblatt { scale: keys.scale.unwrap_or(1.0) })
        }
        "mixture" => {
            reject("amplitude", keys.amplitude.is_some())?;
            reject("scale", keys.scale.is_some())?;
            Ok(InitialData::Mixture { d0: cfg.d0, d1: cfg.d1, weight: keys.weight.unwrap_or(0.5) })
        }
        "bump" => {
            reject("weight", keys.weight.is_some())?;
            reject("scale", keys.scale.is_some())?;
            Ok(InitialData::Bump {
                amplitude: keys.amplitude.unwrap_or(1e-2),
                center: keys.center.unwrap_or(1.0),
                width: keys.width.unwrap_or(0.5),
            })
        }
        other => Err(config_err(line, format!("unknown initial kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::parse(&cfg.dump()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = ExperimentConfig::parse("[model]\nm = 0.5\nmass = 3\n").unwrap_err();
        assert_eq!(err, FadeError::Config { line: 3, message: "unknown key `mass` in section `model`".into() });
        let err = ExperimentConfig::parse("# comment\n[nope]\n").unwrap_err();
        assert!(matches!(err, FadeError::Config { line: 2, .. }));
        let err = ExperimentConfig::parse("m = 0.5\n").unwrap_err();
        assert!(matches!(err, FadeError::Config { line: 1, .. }));
    }

    #[test]
    fn bad_values_are_rejected() {
        assert!(matches!(
            ExperimentConfig::parse("[model]\nd = three\n"),
            Err(FadeError::Config { line: 2, .. })
        ));
        assert!(ExperimentConfig::parse("[model]\nm = 1.5\n").is_err());
        assert!(ExperimentConfig::parse("[solver]\ntheta = 0.2\n").is_err());
    }

    #[test]
    fn bump_round_trips_with_explicit_dstar() {
        let text = "[model]\nm = 0.55\nd = 5\ndstar = 1\n[initial]\nkind = bump\namplitude = 0.02\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.initial, InitialData::Bump { amplitude: 0.02, center: 1.0, width: 0.5 });
        assert_eq!(ExperimentConfig::parse(&cfg.dump()).unwrap(), cfg);
    }
}
