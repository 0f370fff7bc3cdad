//! The built-in problem set shared by the property suite, the CLI and the tests.

use crate::analysis::find_eps;
use crate::problem::{validate_spec, Family, InitialData, ProblemSpec, ValidatedProblem};
use crate::solver::{BoundaryStencil, MmsConfig, SolverConfig};

/// `d1 = d2 = s0 = mu = rho = 1` with the given exponents.
pub fn unit_spec(p: f64, q: f64) -> ProblemSpec {
    ProblemSpec {
        d1: 1.0,
        d2: 1.0,
        p,
        q,
        mu: 1.0,
        rho: 1.0,
        s0: 1.0,
    }
}

pub fn parabola(spec: ProblemSpec, amplitude: f64, n: usize) -> ValidatedProblem {
    validate_spec(&spec, &InitialData::family(Family::Parabola, amplitude), n)
        .expect("canonical problems are valid")
}

pub fn every(dt: f64, t_end: f64) -> Vec<f64> {
    let count = (t_end / dt).round() as usize;
    (1..=count).map(|k| k as f64 * dt).collect()
}

fn config(t_end: f64, snapshot_dt: f64, stencil: BoundaryStencil) -> SolverConfig {
    SolverConfig {
        n: 64,
        t_end,
        snapshot_times: every(snapshot_dt, t_end),
        boundary_stencil: stencil,
        ..SolverConfig::default()
    }
}

/// Amplitude a quarter of the largest symmetric certificate amplitude
/// (1/64 for the unit parameters with `p = q = 2`).
pub fn small_data_amplitude() -> f64 {
    find_eps(&unit_spec(2.0, 2.0))
        .ok()
        .and_then(|s| s.eps())
        .expect("p = q = 2 admits a certificate")
        * 0.25
}

pub fn small_data(t_end: f64, stencil: BoundaryStencil) -> (ValidatedProblem, SolverConfig) {
    (
        parabola(unit_spec(2.0, 2.0), small_data_amplitude(), 64),
        config(t_end, 0.5, stencil),
    )
}

pub fn pq_one(stencil: BoundaryStencil) -> (ValidatedProblem, SolverConfig) {
    (parabola(unit_spec(1.0, 1.0), 10.0, 64), config(10.0, 0.5, stencil))
}

pub fn blowup(stencil: BoundaryStencil) -> (ValidatedProblem, SolverConfig) {
    (parabola(unit_spec(2.0, 2.0), 50.0, 64), config(5.0, 0.5, stencil))
}

pub const CASCADE_SCHEDULE: [u32; 4] = [1, 2, 4, 8];

pub fn cascade(stencil: BoundaryStencil) -> (ValidatedProblem, SolverConfig) {
    (parabola(unit_spec(0.5, 2.0), 1.0, 64), config(1.0, 0.05, stencil))
}

pub fn doubled_pair(stencil: BoundaryStencil) -> (ValidatedProblem, ValidatedProblem, SolverConfig) {
    let spec = unit_spec(2.0, 2.0);
    (parabola(spec, 0.01, 64), parabola(spec, 0.02, 64), config(5.0, 0.25, stencil))
}

pub fn shifted_pair(stencil: BoundaryStencil) -> (ValidatedProblem, SolverConfig) {
    (parabola(unit_spec(0.5, 2.0), 1.0, 64), config(1.0, 0.05, stencil))
}

pub const SHIFTED_UPPER: (f64, f64) = (0.1, 0.1);

pub fn mms_spec() -> ProblemSpec {
    ProblemSpec {
        d1: 1.0,
        d2: 0.5,
        p: 2.0,
        q: 1.5,
        mu: 0.8,
        rho: 0.5,
        s0: 1.0,
    }
}

pub fn mms_config(stencil: BoundaryStencil) -> MmsConfig {
    MmsConfig {
        boundary_stencil: stencil,
        ..MmsConfig::default()
    }
}
