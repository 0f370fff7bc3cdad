//! Run configuration: one JSON file, unknown keys rejected.

use std::path::Path;

use frontsys_core::cascade::{DEFAULT_SCHEDULE, DEFAULT_TOL};
use frontsys_core::problem::{validate_spec, Family, InitialData, Profile, ProblemError, ProblemSpec, ValidatedProblem};
use frontsys_core::solver::{BoundaryStencil, MmsConfig, SolverConfig};
use frontsys_core::verify::SuiteConfig;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub d1: f64,
    pub d2: f64,
    pub p: f64,
    pub q: f64,
    pub mu: f64,
    pub rho: f64,
    pub s0: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub family: Option<String>,
    pub amplitude: Option<f64>,
    pub samples_u: Option<Vec<f64>>,
    pub samples_v: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    #[serde(rename = "N")]
    pub n: usize,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub blowup_threshold: f64,
    pub snapshot_times: Vec<f64>,
    pub cfl_advection: f64,
    pub cfl_reaction: f64,
    pub stiffness_shift: f64,
    pub boundary_stencil: BoundaryStencil,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            n: d.n,
            dt_init: d.dt_init,
            dt_min: d.dt_min,
            dt_max: d.dt_max,
            t_end: d.t_end,
            blowup_threshold: d.blowup_threshold,
            snapshot_times: d.snapshot_times,
            cfl_advection: d.cfl_advection,
            cfl_reaction: d.cfl_reaction,
            stiffness_shift: d.stiffness_shift,
            boundary_stencil: d.boundary_stencil,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub amplitude: Vec<f64>,
    #[serde(default = "default_max_runs")]
    pub max_runs: usize,
}

fn default_max_runs() -> usize {
    1000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CascadeSection {
    pub schedule: Vec<u32>,
    pub tol: f64,
}

impl Default for CascadeSection {
    fn default() -> Self {
        Self {
            schedule: DEFAULT_SCHEDULE.to_vec(),
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Required by every command except `verify`.
    pub problem: Option<ProblemSection>,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub cascade: CascadeSection,
    #[serde(default)]
    pub mms: MmsConfig,
    #[serde(default)]
    pub verify: SuiteConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::Parse {
                path: if path == "." { "config".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn spec(&self) -> Result<ProblemSpec, ConfigError> {
        let p = self.problem.as_ref().ok_or_else(|| invalid("problem", "section required"))?;
        let spec = ProblemSpec {
            d1: p.d1,
            d2: p.d2,
            p: p.p,
            q: p.q,
            mu: p.mu,
            rho: p.rho,
            s0: p.s0,
        };
        spec.validate().map_err(|e| match &e {
            ProblemError::NonPositiveParameter { field, .. } => invalid(&format!("problem.{field}"), e),
            _ => invalid("problem", e),
        })?;
        Ok(spec)
    }

    pub fn solver(&self) -> Result<SolverConfig, ConfigError> {
        let s = &self.solver;
        let config = SolverConfig {
            n: s.n,
            dt_init: s.dt_init,
            dt_min: s.dt_min,
            dt_max: s.dt_max,
            cfl_advection: s.cfl_advection,
            cfl_reaction: s.cfl_reaction,
            t_end: s.t_end,
            blowup_threshold: s.blowup_threshold,
            snapshot_times: s.snapshot_times.clone(),
            stiffness_shift: s.stiffness_shift,
            boundary_stencil: s.boundary_stencil,
            mms: false,
        };
        config.validate().map_err(|e| invalid("solver", e))?;
        Ok(config)
    }

    /// Family and amplitude of a closed-form initial section.
    pub fn family(&self) -> Result<Option<(Family, f64)>, ConfigError> {
        let init = &self.initial;
        if init.samples_u.is_some() || init.samples_v.is_some() {
            if init.family.is_some() || init.amplitude.is_some() {
                return Err(invalid(
                    "initial",
                    "give either family/amplitude or samples_u/samples_v, not both",
                ));
            }
            return Ok(None);
        }
        let family = match &init.family {
            Some(name) => name.parse::<Family>().map_err(|e| invalid("initial.family", e))?,
            None => Family::Parabola,
        };
        Ok(Some((family, init.amplitude.unwrap_or(1.0))))
    }

    pub fn data(&self) -> Result<InitialData, ConfigError> {
        match self.family()? {
            Some((family, amplitude)) => Ok(InitialData::family(family, amplitude)),
            None => match (&self.initial.samples_u, &self.initial.samples_v) {
                (Some(u), Some(v)) => Ok(InitialData {
                    u0: Profile::Samples(u.clone()),
                    v0: Profile::Samples(v.clone()),
                }),
                (None, _) => Err(invalid("initial.samples_u", "missing (samples_v given)")),
                (_, None) => Err(invalid("initial.samples_v", "missing (samples_u given)")),
            },
        }
    }

    pub fn problem(&self) -> Result<ValidatedProblem, ConfigError> {
        self.problem_with(self.spec()?, self.data()?)
    }

    pub fn problem_with(&self, spec: ProblemSpec, data: InitialData) -> Result<ValidatedProblem, ConfigError> {
        validate_spec(&spec, &data, self.solver.n).map_err(|e| {
            use ProblemError as E;
            let field = match &e {
                E::NonPositiveParameter { field, .. } => format!("problem.{field}"),
                E::InvalidAmplitude(_) => "initial.amplitude".into(),
                E::UnknownFamily(_) => "initial.family".into(),
                E::GridTooSmall(_) => "solver.N".into(),
                E::IncompatibleInitialData { .. } => "initial".into(),
            };
            invalid(&field, e)
        })
    }

    pub fn sweep(&self) -> Result<&SweepSection, ConfigError> {
        let sweep = self.sweep.as_ref().ok_or_else(|| invalid("sweep", "section required"))?;
        for (name, axis) in [("sweep.p", &sweep.p), ("sweep.q", &sweep.q), ("sweep.amplitude", &sweep.amplitude)] {
            if axis.is_empty() {
                return Err(invalid(name, "grid needs at least one value"));
            }
        }
        let runs = sweep.p.len() * sweep.q.len() * sweep.amplitude.len();
        if runs > sweep.max_runs {
            return Err(invalid(
                "sweep.max_runs",
                format!("grid has {runs} cells, cap is {}", sweep.max_runs),
            ));
        }
        if self.family()?.is_none() {
            return Err(invalid("initial", "sweeps need a family, not samples"));
        }
        Ok(sweep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"problem": {"d1": 1, "d2": 1, "p": 2, "q": 2, "mu": 1, "rho": 1, "s0": 1}}"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = Config::parse(MINIMAL).unwrap();
        assert_eq!(c.solver().unwrap(), SolverConfig::default());
        assert_eq!(c.family().unwrap(), Some((Family::Parabola, 1.0)));
        assert_eq!(c.cascade.schedule, vec![1, 2, 4, 8, 16]);
        assert!(c.problem().is_ok());
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = MINIMAL.replace("\"s0\": 1", "\"s0\": 1, \"sO\": 2");
        let err = Config::parse(&text).unwrap_err().to_string();
        assert!(err.contains("problem") && err.contains("sO"), "{err}");
        let err = Config::parse(r#"{"problem": {"d1": 1, "d2": 1, "p": 2, "q": 2, "mu": 1, "rho": 1, "s0": 1}, "solver": {"n": 4}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("solver") && err.contains("`n`"), "{err}");
    }

    #[test]
    fn negative_exponent_is_named() {
        let c = Config::parse(&MINIMAL.replace("\"p\": 2", "\"p\": -1")).unwrap();
        let err = c.problem().unwrap_err().to_string();
        assert!(err.starts_with("problem.p:"), "{err}");
    }

    #[test]
    fn verify_needs_no_problem() {
        let c = Config::parse("{}").unwrap();
        assert!(c.spec().unwrap_err().to_string().starts_with("problem:"));
        assert_eq!(c.verify, SuiteConfig::default());
    }

    #[test]
    fn wrong_type_is_located() {
        let err = Config::parse(&MINIMAL.replace("\"q\": 2", "\"q\": \"two\"")).unwrap_err().to_string();
        assert!(err.starts_with("problem.q:"), "{err}");
    }

    #[test]
    fn mixed_initial_forms_are_rejected() {
        let text = MINIMAL.replace("}}", r#"}, "initial": {"amplitude": 1, "samples_u": [1, 0], "samples_v": [1, 0]}}"#);
        let err = Config::parse(&text).unwrap().data().unwrap_err().to_string();
        assert!(err.starts_with("initial:"), "{err}");
    }

    #[test]
    fn sweep_cap_is_enforced() {
        let text = MINIMAL.replace(
            "}}",
            r#"}, "sweep": {"p": [1, 2], "q": [1, 2], "amplitude": [1], "max_runs": 3}}"#,
        );
        let err = Config::parse(&text).unwrap().sweep().unwrap_err().to_string();
        assert!(err.starts_with("sweep.max_runs"), "{err}");
    }
}
