//! Certificates and diagnostics over finished runs.

mod blowup;
mod certificate;
mod decay;

pub use blowup::{detect_blowup, fit_t_max, FIT_RESIDUAL_FRACTION, FIT_SAMPLES};
pub use certificate::{
    amplitude_cap, certify_global, check_small_data, find_eps, EpsSearch, Feasibility, SmallDataFailure,
    SuperSolution, DOMINATION_TOL, EPS_SEARCH_TOL,
};
pub use decay::{decay_diagnostic, DecayReport, MIN_TAIL_SAMPLES, SETTLED_SPEED};

use thiserror::Error;

use crate::problem::ProblemSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("small-data certificate needs pq > 1 (got pq = {pq})")]
    WrongRegime { pq: f64 },
    #[error("amplitudes must be positive (got eps1 = {eps1}, eps2 = {eps2})")]
    InvalidEps { eps1: f64, eps2: f64 },
    #[error("amplitudes are not feasible: {0:?}")]
    Infeasible(Vec<SmallDataFailure>),
    #[error("point (t = {t}, x = {x}) outside the barrier domain")]
    OutOfDomain { t: f64, x: f64 },
    #[error("sup bound M must be positive (got {0})")]
    InvalidBound(f64),
    #[error("tail window holds {samples} samples, need at least {MIN_TAIL_SAMPLES}")]
    TooShort { samples: usize },
}

/// Slope constants `(K, K̃)` of the boundary comparison functions.
pub fn front_speed_constants(m: f64, spec: &ProblemSpec, u0_c1: f64, v0_c1: f64) -> Result<(f64, f64), AnalysisError> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(AnalysisError::InvalidBound(m));
    }
    let k_u = (4.0 * u0_c1 / (3.0 * m)).max((m.powf(spec.p - 1.0) / (2.0 * spec.d1)).sqrt());
    let k_v = (4.0 * v0_c1 / (3.0 * m)).max((m.powf(spec.q - 1.0) / (2.0 * spec.d2)).sqrt());
    Ok((k_u, k_v))
}

/// A-priori bound `C = mu (2 M K + rho 2 M K̃)` on the front speed of a run
/// whose fields stay below `M`.
///
/// Follows from comparing `u` with `M [2K(s - x) - K^2 (s - x)^2]` near the
/// front, which gives `u_x >= -2MK` there (and likewise for `v`).
pub fn front_speed_bound(m: f64, spec: &ProblemSpec, u0_c1: f64, v0_c1: f64) -> Result<f64, AnalysisError> {
    let (k_u, k_v) = front_speed_constants(m, spec, u0_c1, v0_c1)?;
    Ok(spec.mu * (2.0 * m * k_u + spec.rho * 2.0 * m * k_v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ProblemSpec {
        ProblemSpec {
            d1: 0.5,
            d2: 0.5,
            p: 2.0,
            q: 2.0,
            mu: 1.0,
            rho: 1.0,
            s0: 1.0,
        }
    }

    #[test]
    fn worked_bound_is_four() {
        assert_eq!(front_speed_constants(1.0, &spec(), 0.75, 0.75), Ok((1.0, 1.0)));
        assert_eq!(front_speed_bound(1.0, &spec(), 0.75, 0.75), Ok(4.0));
    }

    #[test]
    fn non_positive_bound_is_rejected() {
        assert_eq!(front_speed_bound(0.0, &spec(), 1.0, 1.0), Err(AnalysisError::InvalidBound(0.0)));
    }

    #[test]
    fn large_m_is_dominated_by_diffusion_term() {
        let m = 1e6;
        let (k, _) = front_speed_constants(m, &spec(), 1.0, 1.0).unwrap();
        assert_eq!(k, (m / (2.0 * 0.5f64)).sqrt());
    }

    #[test]
    fn linear_exponent_gives_m_independent_term() {
        let sp = ProblemSpec { p: 1.0, q: 1.0, ..spec() };
        for m in [1e-3, 1.0, 1e3] {
            let (k, _) = front_speed_constants(m, &sp, 0.0, 0.0).unwrap();
            assert_eq!(k, 1.0);
        }
    }

    #[test]
    fn bound_scales_linearly_in_mu() {
        let base = front_speed_bound(2.0, &spec(), 0.3, 0.9).unwrap();
        let scaled = front_speed_bound(2.0, &ProblemSpec { mu: 3.0, ..spec() }, 0.3, 0.9).unwrap();
        assert!((scaled - 3.0 * base).abs() < 1e-12 * scaled);
    }
}
