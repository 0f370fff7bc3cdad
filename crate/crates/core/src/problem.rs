//! Physical parameters, initial data and their compatibility checks.
//!
//! Initial profiles live on uniform nodes in `x ∈ [0, s0]`. Closed-form
//! families are sampled on demand so every downstream consumer sees plain
//! sequences.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance of the zero-slope check at `x = 0` for sampled data.
pub const SLOPE_TOLERANCE: f64 = 1e-10;

/// Smallest grid accepted when sampling a closed-form family.
pub const MIN_FAMILY_NODES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("parameter `{field}` must be strictly positive (got {value})")]
    NonPositiveParameter { field: &'static str, value: f64 },
    #[error("initial profile {component} is incompatible: {condition}")]
    IncompatibleInitialData {
        component: &'static str,
        condition: Incompatibility,
    },
    #[error("unknown initial family `{0}` (expected `cosine` or `parabola`)")]
    UnknownFamily(String),
    #[error("family amplitude must be strictly positive (got {0})")]
    InvalidAmplitude(f64),
    #[error("grid must have at least {MIN_FAMILY_NODES} intervals (got {0})")]
    GridTooSmall(usize),
}

/// Which part of the compatibility conditions failed.
#[derive(Debug, Clone, PartialEq)]
pub enum Incompatibility {
    TooFewSamples(usize),
    NonFinite { node: usize },
    NotPositive { node: usize, value: f64 },
    EndpointNotZero { value: f64 },
    NonZeroSlope { slope: f64 },
}

impl fmt::Display for Incompatibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewSamples(n) => write!(f, "need at least 3 samples, got {n}"),
            Self::NonFinite { node } => write!(f, "non-finite value at node {node}"),
            Self::NotPositive { node, value } => {
                write!(f, "value {value} at node {node} is not > 0 on [0, s0)")
            }
            Self::EndpointNotZero { value } => write!(f, "value at s0 is {value}, must be exactly 0"),
            Self::NonZeroSlope { slope } => write!(f, "slope at x = 0 is {slope}, must vanish"),
        }
    }
}

/// Parameters of the coupled system.
///
/// `p` is the exponent on `v` in the `u` equation, `q` the exponent on `u`
/// in the `v` equation; the front moves by `s' = -mu (u_x + rho v_x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub d1: f64,
    pub d2: f64,
    pub p: f64,
    pub q: f64,
    pub mu: f64,
    pub rho: f64,
    pub s0: f64,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let fields = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("p", self.p),
            ("q", self.q),
            ("mu", self.mu),
            ("rho", self.rho),
            ("s0", self.s0),
        ];
        for (field, value) in fields {
            // NaN fails this comparison too.
            if !(value > 0.0 && value.is_finite()) {
                return Err(ProblemError::NonPositiveParameter { field, value });
            }
        }
        Ok(())
    }

    /// Both reaction terms are locally Lipschitz (`p >= 1` and `q >= 1`).
    pub fn lipschitz(&self) -> bool {
        self.p >= 1.0 && self.q >= 1.0
    }

    pub fn pq(&self) -> f64 {
        self.p * self.q
    }

    pub fn d_min(&self) -> f64 {
        self.d1.min(self.d2)
    }

    /// Relabels `u <-> v`: `(d1, p) <-> (d2, q)`, `rho -> 1/rho`, `mu -> mu rho`.
    pub fn swapped(&self) -> Self {
        Self {
            d1: self.d2,
            d2: self.d1,
            p: self.q,
            q: self.p,
            mu: self.mu * self.rho,
            rho: 1.0 / self.rho,
            s0: self.s0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `A cos(pi x / (2 s0))`
    Cosine,
    /// `A (1 - (x/s0)^2)`
    Parabola,
}

impl Family {
    /// Value at physical position `x` on `[0, s0]`.
    pub fn eval(self, amplitude: f64, s0: f64, x: f64) -> f64 {
        let r = x / s0;
        match self {
            Family::Cosine => {
                if r >= 1.0 {
                    0.0
                } else {
                    amplitude * (FRAC_PI_2 * r).cos()
                }
            }
            Family::Parabola => amplitude * (1.0 - r * r),
        }
    }

    /// Largest `|d/dx|` over `[0, s0]`.
    pub fn max_slope(self, amplitude: f64, s0: f64) -> f64 {
        match self {
            Family::Cosine => amplitude * FRAC_PI_2 / s0,
            Family::Parabola => 2.0 * amplitude / s0,
        }
    }
}

impl FromStr for Family {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cosine" => Ok(Family::Cosine),
            "parabola" => Ok(Family::Parabola),
            other => Err(ProblemError::UnknownFamily(other.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Cosine => "cosine",
            Family::Parabola => "parabola",
        })
    }
}

/// One initial profile: a named family or samples at uniform nodes on `[0, s0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Family { family: Family, amplitude: f64 },
    Samples(Vec<f64>),
}

impl Profile {
    pub fn family(family: Family, amplitude: f64) -> Self {
        Profile::Family { family, amplitude }
    }

    /// Evaluates the profile at physical `x`; samples are interpolated linearly.
    pub fn eval(&self, s0: f64, x: f64) -> f64 {
        match self {
            Profile::Family { family, amplitude } => family.eval(*amplitude, s0, x),
            Profile::Samples(values) => {
                let n = values.len() - 1;
                let pos = (x / s0).clamp(0.0, 1.0) * n as f64;
                let i = (pos.floor() as usize).min(n - 1);
                let frac = pos - i as f64;
                values[i] + frac * (values[i + 1] - values[i])
            }
        }
    }

    /// `||.||_inf + ||d/dx||_inf` over `[0, s0]`.
    pub fn c1_norm(&self, s0: f64) -> f64 {
        match self {
            Profile::Family { family, amplitude } => amplitude + family.max_slope(*amplitude, s0),
            Profile::Samples(values) => {
                let h = s0 / (values.len() - 1) as f64;
                let sup = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let slope = values
                    .windows(2)
                    .fold(0.0f64, |m, w| m.max(((w[1] - w[0]) / h).abs()));
                sup + slope
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Profile::Family { amplitude, .. } => *amplitude,
            Profile::Samples(values) => values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub u0: Profile,
    pub v0: Profile,
}

impl InitialData {
    pub fn family(family: Family, amplitude: f64) -> Self {
        Self {
            u0: Profile::family(family, amplitude),
            v0: Profile::family(family, amplitude),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            u0: self.v0.clone(),
            v0: self.u0.clone(),
        }
    }
}

/// A parameter set together with initial data that passed every check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedProblem {
    pub spec: ProblemSpec,
    pub data: InitialData,
    /// `u0` at `n + 1` uniform nodes of `[0, s0]`.
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl ValidatedProblem {
    /// Initial fields on a uniform `y`-grid with `n` intervals, `w(0, y) = u0(s0 y)`.
    pub fn initial_profiles(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let s0 = self.spec.s0;
        let sample = |profile: &Profile, values: &[f64]| -> Vec<f64> {
            if values.len() == n + 1 {
                return values.to_vec();
            }
            let mut out: Vec<f64> = (0..=n)
                .map(|i| profile.eval(s0, s0 * i as f64 / n as f64))
                .collect();
            out[n] = 0.0;
            out
        };
        (sample(&self.data.u0, &self.u0), sample(&self.data.v0, &self.v0))
    }

    /// The same problem with `u` and `v` relabelled (see [`ProblemSpec::swapped`]).
    pub fn swapped(&self) -> Self {
        Self {
            spec: self.spec.swapped(),
            data: self.data.swapped(),
            u0: self.v0.clone(),
            v0: self.u0.clone(),
        }
    }
}

/// Samples a closed-form family at `n + 1` uniform nodes of `[0, s0]`.
pub fn make_initial_family(
    family: Family,
    amplitude: f64,
    s0: f64,
    n: usize,
) -> Result<Vec<f64>, ProblemError> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(ProblemError::InvalidAmplitude(amplitude));
    }
    if !(s0 > 0.0 && s0.is_finite()) {
        return Err(ProblemError::NonPositiveParameter { field: "s0", value: s0 });
    }
    let mut values: Vec<f64> = (0..=n)
        .map(|i| family.eval(amplitude, s0, s0 * i as f64 / n as f64))
        .collect();
    // The closed forms vanish at s0 analytically; pin the node to an exact zero.
    if let Some(last) = values.last_mut() {
        *last = 0.0;
    }
    Ok(values)
}

/// Same as [`make_initial_family`] but parses the family name.
pub fn make_initial_family_named(
    name: &str,
    amplitude: f64,
    s0: f64,
    n: usize,
) -> Result<Vec<f64>, ProblemError> {
    make_initial_family(name.parse()?, amplitude, s0, n)
}

/// Checks a sampled profile against the compatibility conditions.
pub fn check_samples(values: &[f64], s0: f64) -> Result<(), Incompatibility> {
    if values.len() < 3 {
        return Err(Incompatibility::TooFewSamples(values.len()));
    }
    if let Some(node) = values.iter().position(|v| !v.is_finite()) {
        return Err(Incompatibility::NonFinite { node });
    }
    let n = values.len() - 1;
    if values[n] != 0.0 {
        return Err(Incompatibility::EndpointNotZero { value: values[n] });
    }
    if let Some(node) = values[..n].iter().position(|&v| v <= 0.0) {
        return Err(Incompatibility::NotPositive {
            node,
            value: values[node],
        });
    }
    let h = s0 / n as f64;
    let slope = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())) / s0;
    if slope.abs() > SLOPE_TOLERANCE * scale {
        return Err(Incompatibility::NonZeroSlope { slope });
    }
    Ok(())
}

/// Validates parameters and initial data; families are sampled on `n` intervals.
pub fn validate_spec(
    spec: &ProblemSpec,
    data: &InitialData,
    n: usize,
) -> Result<ValidatedProblem, ProblemError> {
    spec.validate()?;
    let prepare = |component: &'static str, profile: &Profile| -> Result<Vec<f64>, ProblemError> {
        match profile {
            Profile::Family { family, amplitude } => {
                if n < MIN_FAMILY_NODES {
                    return Err(ProblemError::GridTooSmall(n));
                }
                make_initial_family(*family, *amplitude, spec.s0, n)
            }
            Profile::Samples(values) => {
                check_samples(values, spec.s0).map_err(|condition| {
                    ProblemError::IncompatibleInitialData {
                        component,
                        condition,
                    }
                })?;
                Ok(values.clone())
            }
        }
    };
    let u0 = prepare("u0", &data.u0)?;
    let v0 = prepare("v0", &data.v0)?;
    Ok(ValidatedProblem {
        spec: *spec,
        data: data.clone(),
        u0,
        v0,
    })
}
