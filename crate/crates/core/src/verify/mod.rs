//! Comparison harness and the cross-module property suite.
//!
//! Paired runs share one step sequence; their orderings are checked in
//! physical space on the lower run's domain.

pub mod canonical;
mod ordering;
mod suite;

pub use ordering::{check_ordering, Component, Direction, OrderingReport, ViolationSite, ORDERING_TOL};
pub use suite::{property_suite, Check, CheckStatus, SuiteConfig, SuiteReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::ValidatedProblem;
use crate::solver::{simulate_lockstep, Member, SolverConfig, SolverError};
use crate::state::Trajectory;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("comparison hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error(
        "ordering violated: {:?} at t = {}, x = {:?} (lower {} > upper {}, band {})",
        site.component, site.t, site.x, site.lower, site.upper, site.band
    )]
    OrderingViolation {
        site: ViolationSite,
        outcome: Box<PairOutcome>,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy)]
pub struct RunInput<'a> {
    pub problem: &'a ValidatedProblem,
    pub shifts: (f64, f64),
}

/// Which comparison statement the pair instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVariant {
    /// Strictly smaller initial front.
    StrictFront,
    /// Equal fronts, strictly smaller shifts in both reactions.
    StrictShift,
    /// Identical inputs.
    Reflexive,
    /// Non-strict ordering only (e.g. larger data on the same support).
    Weak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub variant: PairVariant,
    pub report: OrderingReport,
    pub lower: Trajectory,
    pub upper: Trajectory,
    pub notes: Vec<String>,
}

fn check_hypotheses(lower: &RunInput<'_>, upper: &RunInput<'_>) -> Result<PairVariant, VerifyError> {
    let (ls, us) = (&lower.problem.spec, &upper.problem.spec);
    let params = [
        ("d1", ls.d1, us.d1),
        ("d2", ls.d2, us.d2),
        ("p", ls.p, us.p),
        ("q", ls.q, us.q),
        ("mu", ls.mu, us.mu),
        ("rho", ls.rho, us.rho),
    ];
    if let Some((name, a, b)) = params.iter().find(|(_, a, b)| a != b) {
        return Err(VerifyError::HypothesisViolation(format!(
            "parameter {name} differs ({a} vs {b})"
        )));
    }
    if lower.shifts.0 > upper.shifts.0 || lower.shifts.1 > upper.shifts.1 {
        return Err(VerifyError::HypothesisViolation(format!(
            "lower shifts {:?} exceed upper shifts {:?}",
            lower.shifts, upper.shifts
        )));
    }
    if ls.s0 > us.s0 {
        return Err(VerifyError::HypothesisViolation(format!(
            "lower s0 = {} exceeds upper s0 = {}",
            ls.s0, us.s0
        )));
    }
    let nodes = lower.problem.u0.len().max(upper.problem.u0.len()).max(65) - 1;
    let scale = lower.problem.data.u0.sup().max(lower.problem.data.v0.sup());
    for i in 0..=nodes {
        let x = ls.s0 * i as f64 / nodes as f64;
        let pairs = [
            ("u0", lower.problem.data.u0.eval(ls.s0, x), upper.problem.data.u0.eval(us.s0, x)),
            ("v0", lower.problem.data.v0.eval(ls.s0, x), upper.problem.data.v0.eval(us.s0, x)),
        ];
        for (name, lo, up) in pairs {
            if lo > up + 1e-12 * scale {
                return Err(VerifyError::HypothesisViolation(format!(
                    "lower {name}({x}) = {lo} exceeds upper {up}"
                )));
            }
        }
    }

    let same_data = lower.problem.data == upper.problem.data;
    Ok(if ls.s0 < us.s0 {
        PairVariant::StrictFront
    } else if lower.shifts.0 < upper.shifts.0 && lower.shifts.1 < upper.shifts.1 {
        PairVariant::StrictShift
    } else if same_data && lower.shifts == upper.shifts {
        PairVariant::Reflexive
    } else {
        PairVariant::Weak
    })
}

/// Runs both problems in lockstep and checks `lower <= upper` everywhere.
pub fn compare_ordered_runs(
    lower: RunInput<'_>,
    upper: RunInput<'_>,
    config: &SolverConfig,
    tol: f64,
) -> Result<PairOutcome, VerifyError> {
    let variant = check_hypotheses(&lower, &upper)?;
    let mut runs = simulate_lockstep(
        &[
            Member {
                problem: lower.problem,
                shifts: lower.shifts,
            },
            Member {
                problem: upper.problem,
                shifts: upper.shifts,
            },
        ],
        config,
    )?;
    let upper_run = runs.pop().expect("two members");
    let lower_run = runs.pop().expect("two members");
    let report = check_ordering(&lower_run, &upper_run, tol, Direction::AtMost);
    let mut notes = vec!["homogeneous Neumann at x = 0 accepted for both the lower and upper role".to_string()];
    if variant == PairVariant::Weak {
        notes.push("non-strict hypotheses: ordering tested, strictness not expected".to_string());
    }
    let outcome = PairOutcome {
        variant,
        report,
        lower: lower_run,
        upper: upper_run,
        notes,
    };
    if let Some(site) = outcome.report.worst.filter(|s| s.beyond_band()) {
        return Err(VerifyError::OrderingViolation {
            site,
            outcome: Box::new(outcome),
        });
    }
    Ok(outcome)
}
