//! Regularized approximation for sublinear exponents.
//!
//! When `p < 1` or `q < 1` the reactions are not Lipschitz at zero. The
//! shifted problems with reactions `(v + 1/n)^p`, `(u + 1/n)^q` are, and
//! their solutions decrease in `n` towards the maximal positive solution.
//! All levels run in lockstep on one grid so the ordering can be checked
//! node by node.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::ValidatedProblem;
use crate::solver::{simulate, simulate_lockstep, Member, SolverConfig, SolverError};
use crate::state::{FixedDomainState, Trajectory};
use crate::verify::{check_ordering, Direction, OrderingReport, ViolationSite, ORDERING_TOL};

pub const DEFAULT_SCHEDULE: [u32; 5] = [1, 2, 4, 8, 16];
pub const DEFAULT_TOL: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error(
        "ordering violated between n = {coarser} and n = {finer}: {:?} at t = {}, x = {:?}, excess {} beyond band {}",
        site.component, site.t, site.x, site.excess, site.band
    )]
    OrderingViolation {
        coarser: u32,
        finer: u32,
        site: ViolationSite,
        result: Box<CascadeResult>,
    },
    #[error("no convergence within the schedule (last difference {last_difference})")]
    NoConvergence {
        last_difference: f64,
        result: Box<CascadeResult>,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// The reaction shifts of the active level.
///
/// Only feeds the stiffness estimate; the limit run of a cascade keeps the
/// last finite level's shift here.
pub fn shift_floor(state: &FixedDomainState) -> (f64, f64) {
    (state.shift_a, state.shift_b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeLevel {
    /// `None` for an unshifted run (Lipschitz delegation).
    pub n: Option<u32>,
    pub shift: f64,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeResult {
    pub levels: Vec<CascadeLevel>,
    /// `true` when the exponents were Lipschitz and a single plain run was made.
    pub delegated: bool,
    pub warnings: Vec<String>,
    /// Ordering of level `k + 1` below level `k`.
    pub orderings: Vec<OrderingReport>,
    /// Largest difference between consecutive levels over all stored times.
    pub differences: Vec<f64>,
    /// The `n` at which consecutive levels first agreed within `tol`.
    pub converged_at: Option<u32>,
}

impl CascadeResult {
    /// The limit estimate (the finest level).
    pub fn limit(&self) -> &Trajectory {
        &self.levels.last().expect("cascade has at least one level").trajectory
    }

    pub fn differences_non_increasing(&self) -> bool {
        self.differences.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn ordering_holds(&self) -> bool {
        self.orderings.iter().all(OrderingReport::holds)
    }
}

pub fn run_cascade(
    problem: &ValidatedProblem,
    config: &SolverConfig,
    schedule: &[u32],
    tol: f64,
) -> Result<CascadeResult, CascadeError> {
    if problem.spec.lipschitz() {
        let trajectory = simulate(problem, config, (0.0, 0.0))?;
        return Ok(CascadeResult {
            levels: vec![CascadeLevel {
                n: None,
                shift: 0.0,
                trajectory,
            }],
            delegated: true,
            warnings: vec!["Lipschitz regime: p >= 1 and q >= 1, single unshifted run".to_string()],
            orderings: Vec::new(),
            differences: Vec::new(),
            converged_at: None,
        });
    }
    if schedule.is_empty() {
        return Err(CascadeError::InvalidSchedule("empty".into()));
    }
    if schedule[0] == 0 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CascadeError::InvalidSchedule(format!(
            "must be strictly increasing positive integers, got {schedule:?}"
        )));
    }
    if !(tol > 0.0) {
        return Err(CascadeError::InvalidSchedule(format!("tol must be positive, got {tol}")));
    }

    let members: Vec<Member<'_>> = schedule
        .iter()
        .map(|&n| {
            let shift = 1.0 / f64::from(n);
            Member {
                problem,
                shifts: (shift, shift),
            }
        })
        .collect();
    let runs = simulate_lockstep(&members, config)?;

    let mut result = CascadeResult {
        levels: Vec::with_capacity(runs.len()),
        delegated: false,
        warnings: Vec::new(),
        orderings: Vec::new(),
        differences: Vec::new(),
        converged_at: None,
    };
    for (&n, trajectory) in schedule.iter().zip(runs) {
        result.levels.push(CascadeLevel {
            n: Some(n),
            shift: 1.0 / f64::from(n),
            trajectory,
        });
    }
    let mut first_violation = None;
    for k in 1..result.levels.len() {
        let report = check_ordering(
            &result.levels[k].trajectory,
            &result.levels[k - 1].trajectory,
            ORDERING_TOL,
            Direction::AtMost,
        );
        if first_violation.is_none() && !report.holds() {
            first_violation = Some((schedule[k - 1], schedule[k], report.worst.expect("violation has a site")));
        }
        result.differences.push(report.max_abs_diff);
        if result.converged_at.is_none() && report.max_abs_diff < tol {
            result.converged_at = Some(schedule[k]);
        }
        result.orderings.push(report);
    }

    if let Some((coarser, finer, site)) = first_violation {
        return Err(CascadeError::OrderingViolation {
            coarser,
            finer,
            site,
            result: Box::new(result),
        });
    }
    if result.converged_at.is_none() {
        let last_difference = result.differences.last().copied().unwrap_or(f64::INFINITY);
        return Err(CascadeError::NoConvergence {
            last_difference,
            result: Box::new(result),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{validate_spec, Family, InitialData, ProblemSpec};

    fn problem(p: f64, q: f64) -> ValidatedProblem {
        let spec = ProblemSpec {
            d1: 1.0,
            d2: 1.0,
            p,
            q,
            mu: 1.0,
            rho: 1.0,
            s0: 1.0,
        };
        validate_spec(&spec, &InitialData::family(Family::Parabola, 1.0), 32).unwrap()
    }

    fn config() -> SolverConfig {
        SolverConfig {
            n: 32,
            t_end: 0.2,
            snapshot_times: vec![0.05, 0.1, 0.15],
            ..Default::default()
        }
    }

    #[test]
    fn shift_floor_reports_level_shift() {
        let state = FixedDomainState {
            t: 0.0,
            s: 1.0,
            s_prime: 0.0,
            w: vec![0.0; 9],
            z: vec![0.0; 9],
            shift_a: 0.25,
            shift_b: 0.25,
        };
        assert_eq!(shift_floor(&state), (0.25, 0.25));
    }

    #[test]
    fn lipschitz_exponents_delegate() {
        let result = run_cascade(&problem(1.0, 1.0), &config(), &DEFAULT_SCHEDULE, DEFAULT_TOL).unwrap();
        assert!(result.delegated);
        assert_eq!(result.levels.len(), 1);
        assert!(result.warnings[0].contains("Lipschitz"));
    }

    #[test]
    fn bad_schedules_are_rejected() {
        let p = problem(0.5, 2.0);
        for schedule in [&[][..], &[2, 2], &[0, 1], &[4, 2]] {
            assert!(matches!(
                run_cascade(&p, &config(), schedule, DEFAULT_TOL),
                Err(CascadeError::InvalidSchedule(_))
            ));
        }
    }

    #[test]
    fn levels_decrease_in_n() {
        let result = match run_cascade(&problem(0.5, 2.0), &config(), &[1, 2, 4], 1e-12) {
            Err(CascadeError::NoConvergence { result, .. }) => *result,
            other => panic!("expected NoConvergence at this tolerance, got {other:?}"),
        };
        assert!(result.ordering_holds());
        let t = result.levels[0].trajectory.times.len();
        for level in &result.levels {
            assert_eq!(level.trajectory.times.len(), t);
        }
        for k in 0..t {
            assert!(result.levels[1].trajectory.sup_u[k] <= result.levels[0].trajectory.sup_u[k]);
            assert!(result.levels[2].trajectory.sup_u[k] <= result.levels[1].trajectory.sup_u[k]);
        }
        assert!(result.differences_non_increasing());
    }

    #[test]
    fn repeated_level_has_zero_difference() {
        let p = problem(0.5, 2.0);
        let a = simulate(&p, &config(), (0.25, 0.25)).unwrap();
        let b = simulate(&p, &config(), (0.25, 0.25)).unwrap();
        let report = check_ordering(&a, &b, ORDERING_TOL, Direction::AtMost);
        assert_eq!(report.max_abs_diff, 0.0);
        assert_eq!(a, b);
    }
}
