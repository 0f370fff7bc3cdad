//! Numerical solver for a coupled semilinear parabolic system
//!
//! ```text
//! u_t = d1 u_xx + v^p,   v_t = d2 v_xx + u^q,   0 < x < s(t),
//! u_x = v_x = 0 at x = 0,   u = v = 0 at x = s(t),
//! s'(t) = -mu (u_x + rho v_x) at x = s(t),
//! ```
//!
//! solved on the fixed domain `y = x / s(t)` with an IMEX finite-difference
//! scheme, plus blow-up detection, small-data certificates, a shifted
//! cascade for sublinear exponents and an ordering harness.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cascade;
pub mod problem;
pub mod solver;
pub mod state;
pub mod transform;
pub mod tridiag;
pub mod verdict;
pub mod verify;

pub use problem::{validate_spec, Family, InitialData, Profile, ProblemError, ProblemSpec, ValidatedProblem};
pub use solver::{simulate, simulate_lockstep, SolverConfig, SolverError};
pub use state::{FixedDomainState, RunStatus, StopReason, Trajectory};
pub use verdict::RunVerdict;
