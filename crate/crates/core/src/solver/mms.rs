//! Manufactured moving-boundary solution used as a convergence oracle.
//!
//! `s*(t) = s0 + t`, `u* = v* = A(t) (s*^2 - x^2)` with
//! `A = 1 / (2 mu (1 + rho) s*)`. The profiles satisfy the Neumann and
//! Dirichlet conditions, and `-mu (u*_x + rho v*_x)` at `x = s*` equals 1,
//! which is exactly `s*'`. Sources make the reaction equations hold.

use serde::{Deserialize, Serialize};

use super::{BoundaryStencil, SolverError, Stepper};
use crate::problem::ProblemSpec;
use crate::state::FixedDomainState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    spec: ProblemSpec,
}

impl Manufactured {
    pub fn new(spec: ProblemSpec) -> Self {
        Self { spec }
    }

    pub fn front(&self, t: f64) -> f64 {
        self.spec.s0 + t
    }

    pub fn front_speed(&self, _t: f64) -> f64 {
        1.0
    }

    /// `A(t) = B(t)`.
    pub fn amplitude(&self, t: f64) -> f64 {
        1.0 / (2.0 * self.spec.mu * (1.0 + self.spec.rho) * self.front(t))
    }

    pub fn u(&self, t: f64, x: f64) -> f64 {
        let s = self.front(t);
        self.amplitude(t) * (s * s - x * x)
    }

    pub fn v(&self, t: f64, x: f64) -> f64 {
        self.u(t, x)
    }

    /// Exact field in fixed-domain coordinates, `u*(t, y s*(t))`.
    pub fn w(&self, t: f64, y: f64) -> f64 {
        self.u(t, y * self.front(t))
    }

    fn u_t(&self, t: f64, x: f64) -> f64 {
        // A' = -A s'/s with s' = 1
        let s = self.front(t);
        let a = self.amplitude(t);
        -a * (s * s - x * x) / s + 2.0 * a * s
    }

    fn u_xx(&self, t: f64) -> f64 {
        -2.0 * self.amplitude(t)
    }

    /// `u*_t - d1 u*_xx - (v*)^p`.
    pub fn source_u(&self, t: f64, x: f64) -> f64 {
        self.u_t(t, x) - self.spec.d1 * self.u_xx(t) - self.v(t, x).max(0.0).powf(self.spec.p)
    }

    /// `v*_t - d2 v*_xx - (u*)^q`.
    pub fn source_v(&self, t: f64, x: f64) -> f64 {
        self.u_t(t, x) - self.spec.d2 * self.u_xx(t) - self.u(t, x).max(0.0).powf(self.spec.q)
    }

    /// Exact state on an `n`-interval grid.
    pub fn state(&self, t: f64, n: usize) -> FixedDomainState {
        let w: Vec<f64> = (0..=n)
            .map(|i| if i == n { 0.0 } else { self.w(t, i as f64 / n as f64) })
            .collect();
        FixedDomainState {
            t,
            s: self.front(t),
            s_prime: self.front_speed(t),
            z: w.clone(),
            w,
            shift_a: 0.0,
            shift_b: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MmsConfig {
    /// Grid sizes of the refinement ladder.
    pub levels: Vec<usize>,
    /// `dt = dt_factor * dy^2`, rounded down to divide `t_end`.
    pub dt_factor: f64,
    pub t_end: f64,
    pub boundary_stencil: BoundaryStencil,
}

impl Default for MmsConfig {
    fn default() -> Self {
        Self {
            levels: vec![32, 64, 128],
            dt_factor: 1.0,
            t_end: 0.25,
            boundary_stencil: BoundaryStencil::SecondOrder,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsRow {
    pub n: usize,
    pub dt: f64,
    pub err_u: f64,
    pub err_v: f64,
    pub err_s: f64,
    /// Observed order of `err_u` against the previous row, in `dy`.
    pub order_u: Option<f64>,
    pub order_v: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsTable {
    pub rows: Vec<MmsRow>,
}

impl MmsTable {
    pub fn final_order_u(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order_u)
    }

    pub fn min_order(&self) -> Option<f64> {
        self.rows
            .iter()
            .flat_map(|r| [r.order_u, r.order_v])
            .flatten()
            .reduce(f64::min)
    }

    pub fn front_error_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].err_s < w[0].err_s)
    }
}

/// Runs the manufactured problem on every ladder level with fixed steps.
pub fn run_mms(spec: &ProblemSpec, config: &MmsConfig) -> Result<MmsTable, SolverError> {
    spec.validate()?;
    if config.levels.iter().any(|&n| n < 8) {
        return Err(SolverError::Config("mms levels must be at least 8".into()));
    }
    if !(config.dt_factor > 0.0 && config.t_end > 0.0) {
        return Err(SolverError::Config("mms dt_factor and t_end must be positive".into()));
    }
    let exact = Manufactured::new(*spec);
    let mut rows: Vec<MmsRow> = Vec::with_capacity(config.levels.len());
    for &n in &config.levels {
        let dy = 1.0 / n as f64;
        let steps = (config.t_end / (config.dt_factor * dy * dy)).ceil() as usize;
        let dt = config.t_end / steps as f64;
        let mut stepper = Stepper::new(*spec, config.boundary_stencil, true);
        let mut state = exact.state(0.0, n);
        for k in 1..=steps {
            state = stepper.advance(&state, dt)?.state;
            state.t = k as f64 * dt;
        }
        let t = config.t_end;
        let err = |field: &[f64]| {
            field
                .iter()
                .enumerate()
                .map(|(i, &v)| (v - exact.w(t, i as f64 * dy)).abs())
                .fold(0.0f64, f64::max)
        };
        let err_u = err(&state.w);
        let err_v = err(&state.z);
        let err_s = (state.s - exact.front(t)).abs();
        let order = |prev: f64, cur: f64, prev_n: usize| (prev / cur).ln() / (n as f64 / prev_n as f64).ln();
        let (order_u, order_v) = match rows.last() {
            Some(prev) => (
                Some(order(prev.err_u, err_u, prev.n)),
                Some(order(prev.err_v, err_v, prev.n)),
            ),
            None => (None, None),
        };
        rows.push(MmsRow {
            n,
            dt,
            err_u,
            err_v,
            err_s,
            order_u,
            order_v,
        });
    }
    Ok(MmsTable { rows })
}
