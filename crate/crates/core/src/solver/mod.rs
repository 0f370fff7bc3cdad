//! Time integration on the fixed domain `y ∈ [0, 1]`.
//!
//! Each step advances the front explicitly from the current boundary slopes,
//! then solves one tridiagonal system per component with diffusion and
//! advection taken at the new level and the reactions at the old level.

mod mms;

pub use mms::{run_mms, Manufactured, MmsConfig, MmsRow, MmsTable};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cascade::shift_floor;
use crate::problem::{ProblemError, ProblemSpec, ValidatedProblem};
use crate::state::{sup, FixedDomainState, RunStatus, StopReason, Trajectory};
use crate::transform::{self, TransformError};
use crate::tridiag;

/// Values in `(-CLAMP_BAND * sup, 0)` are rounded up to zero; anything lower rejects the step.
pub const CLAMP_BAND: f64 = 1e-14;

/// Front speeds below this are treated as a stationary front in [`choose_dt`].
const SPEED_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("step rejected at t = {t}: {component}[{node}] = {value} below the clamp band")]
    StepRejected {
        t: f64,
        component: &'static str,
        node: usize,
        value: f64,
    },
    #[error("non-finite value in {component} at t = {t}")]
    NonFiniteValue { t: f64, component: &'static str },
    #[error("time step collapsed to {dt} at t = {t}")]
    StepCollapse { t: f64, dt: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Which one-sided stencil feeds the front law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryStencil {
    #[default]
    SecondOrder,
    /// Deliberately degraded stencil for fault-injection runs.
    FirstOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of grid intervals.
    pub n: usize,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub cfl_advection: f64,
    pub cfl_reaction: f64,
    pub t_end: f64,
    pub blowup_threshold: f64,
    pub snapshot_times: Vec<f64>,
    /// Shift used in the stiffness estimate of a sublinear term whose own shift is zero.
    pub stiffness_shift: f64,
    pub boundary_stencil: BoundaryStencil,
    /// Adds the manufactured sources of [`Manufactured`] to both equations.
    pub mms: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n: 64,
            dt_init: 1e-4,
            dt_min: 1e-12,
            dt_max: 1e-2,
            cfl_advection: 0.5,
            cfl_reaction: 0.2,
            t_end: 1.0,
            blowup_threshold: 1e8,
            snapshot_times: Vec::new(),
            stiffness_shift: 1.0 / 16.0,
            boundary_stencil: BoundaryStencil::SecondOrder,
            mms: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |msg: String| Err(SolverError::Config(msg));
        if self.n < 8 {
            return fail(format!("n must be at least 8 (got {})", self.n));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return fail(format!(
                "need 0 < dt_min <= dt_init <= dt_max (got {}, {}, {})",
                self.dt_min, self.dt_init, self.dt_max
            ));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return fail(format!("t_end must be positive (got {})", self.t_end));
        }
        if !(self.blowup_threshold > 0.0) {
            return fail(format!("blowup_threshold must be positive (got {})", self.blowup_threshold));
        }
        if !(self.cfl_advection > 0.0 && self.cfl_reaction > 0.0) {
            return fail("cfl factors must be positive".into());
        }
        if !(self.stiffness_shift > 0.0) {
            return fail(format!("stiffness_shift must be positive (got {})", self.stiffness_shift));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return fail(format!("snapshot time {t} must be finite and non-negative"));
        }
        Ok(())
    }

    /// Output times inside `(0, t_end]`, sorted, always ending at `t_end`.
    fn targets(&self) -> Vec<f64> {
        let mut targets: Vec<f64> = self
            .snapshot_times
            .iter()
            .copied()
            .filter(|&t| t > 0.0 && t < self.t_end)
            .collect();
        targets.sort_by(f64::total_cmp);
        targets.dedup();
        targets.push(self.t_end);
        targets
    }
}

/// Explicit-reaction stiffness `e (value + shift)^(e - 1)` of one reaction term.
///
/// For `e < 1` the derivative is largest where the field vanishes (the
/// Dirichlet node), so only the shift enters.
pub fn reaction_stiffness(exponent: f64, sup_value: f64, shift: f64) -> f64 {
    if exponent >= 1.0 {
        exponent * (sup_value + shift).powf(exponent - 1.0)
    } else {
        exponent * shift.powf(exponent - 1.0)
    }
}

/// Stable step for the current state, or [`SolverError::StepCollapse`].
pub fn choose_dt(state: &FixedDomainState, spec: &ProblemSpec, config: &SolverConfig) -> Result<f64, SolverError> {
    let advective = config.cfl_advection * state.dy() * state.s / state.s_prime.max(SPEED_FLOOR);
    let (shift_a, shift_b) = shift_floor(state);
    let effective = |exponent: f64, shift: f64| {
        if exponent < 1.0 && shift <= 0.0 {
            config.stiffness_shift
        } else {
            shift
        }
    };
    let stiffness = reaction_stiffness(spec.p, state.sup_z(), effective(spec.p, shift_b))
        .max(reaction_stiffness(spec.q, state.sup_w(), effective(spec.q, shift_a)))
        .max(1.0);
    let dt = config.dt_max.min(advective).min(config.cfl_reaction / stiffness);
    if !(dt >= config.dt_min) {
        return Err(SolverError::StepCollapse { t: state.t, dt });
    }
    Ok(dt)
}

/// Raw front speed `-(mu/s)(w_y(1) + rho z_y(1))`.
pub fn front_speed(
    w: &[f64],
    z: &[f64],
    s: f64,
    spec: &ProblemSpec,
    stencil: BoundaryStencil,
) -> Result<f64, TransformError> {
    let dy = 1.0 / (w.len() - 1) as f64;
    let slope = match stencil {
        BoundaryStencil::SecondOrder => transform::boundary_slope,
        BoundaryStencil::FirstOrder => transform::boundary_slope_first_order,
    };
    let w_y = slope(w, dy)?;
    let z_y = slope(z, dy)?;
    Ok(-spec.mu * (transform::physical_gradient(w_y, s) + spec.rho * transform::physical_gradient(z_y, s)))
}

/// Result of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: FixedDomainState,
    pub clamps: u64,
    /// Whether a negative raw front speed was floored to zero.
    pub floored: bool,
}

/// Reusable workspace for [`advance_step`].
#[derive(Debug, Clone)]
pub struct Stepper {
    spec: ProblemSpec,
    stencil: BoundaryStencil,
    source: Option<Manufactured>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    pub fn new(spec: ProblemSpec, stencil: BoundaryStencil, mms: bool) -> Self {
        Self {
            spec,
            stencil,
            source: mms.then(|| Manufactured::new(spec)),
            lower: Vec::new(),
            diag: Vec::new(),
            upper: Vec::new(),
            scratch: Vec::new(),
        }
    }

    pub fn from_config(spec: ProblemSpec, config: &SolverConfig) -> Self {
        Self::new(spec, config.boundary_stencil, config.mms)
    }

    /// Front speed of `state`'s profiles, floored at zero.
    pub fn speed_of(&self, w: &[f64], z: &[f64], s: f64) -> Result<(f64, bool), SolverError> {
        let raw = front_speed(w, z, s, &self.spec, self.stencil)?;
        Ok(if raw < 0.0 { (0.0, true) } else { (raw, false) })
    }

    pub fn advance(&mut self, state: &FixedDomainState, dt: f64) -> Result<Step, SolverError> {
        let spec = self.spec;
        let n = state.n();
        let dy = state.dy();

        let (s_prime, floored) = self.speed_of(&state.w, &state.z, state.s)?;
        let s_new = state.s + dt * s_prime;
        let (f, _) = transform::coefficients(s_new, s_prime, 0.0);

        // explicit reactions at the old level
        let mut w_new: Vec<f64> = Vec::with_capacity(n + 1);
        let mut z_new: Vec<f64> = Vec::with_capacity(n + 1);
        for i in 0..n {
            let mut rw = (state.z[i] + state.shift_b).powf(spec.p);
            let mut rz = (state.w[i] + state.shift_a).powf(spec.q);
            if let Some(mms) = &self.source {
                let x = state.y(i) * state.s;
                rw += mms.source_u(state.t, x);
                rz += mms.source_v(state.t, x);
            }
            w_new.push(state.w[i] + dt * rw);
            z_new.push(state.z[i] + dt * rz);
        }

        self.implicit_solve(&mut w_new, spec.d1 * f, s_prime, s_new, dt, dy);
        self.implicit_solve(&mut z_new, spec.d2 * f, s_prime, s_new, dt, dy);
        w_new.push(0.0);
        z_new.push(0.0);

        let band = CLAMP_BAND * state.sup_w().max(state.sup_z());
        let mut clamps = 0;
        for (component, values) in [("w", &mut w_new), ("z", &mut z_new)] {
            for (node, v) in values.iter_mut().enumerate() {
                if !v.is_finite() {
                    return Err(SolverError::NonFiniteValue { t: state.t, component });
                }
                if *v < 0.0 {
                    if *v < -band {
                        return Err(SolverError::StepRejected {
                            t: state.t,
                            component,
                            node,
                            value: *v,
                        });
                    }
                    *v = 0.0;
                    clamps += 1;
                }
            }
        }
        if !s_new.is_finite() {
            return Err(SolverError::NonFiniteValue { t: state.t, component: "s" });
        }

        let (next_speed, _) = self.speed_of(&w_new, &z_new, s_new)?;
        Ok(Step {
            state: FixedDomainState {
                t: state.t + dt,
                s: s_new,
                s_prime: next_speed,
                w: w_new,
                z: z_new,
                shift_a: state.shift_a,
                shift_b: state.shift_b,
            },
            clamps,
            floored,
        })
    }

    /// Backward-Euler diffusion and advection for the unknowns `0..n`
    /// (`values[n] = 0` is implied), mirror condition at `y = 0`.
    ///
    /// Advection uses central differences while the cell Péclet number
    /// allows an M-matrix and falls back to upwinding otherwise.
    fn implicit_solve(&mut self, values: &mut [f64], diffusion: f64, s_prime: f64, s: f64, dt: f64, dy: f64) {
        let n = values.len();
        self.lower.resize(n, 0.0);
        self.diag.resize(n, 0.0);
        self.upper.resize(n, 0.0);
        self.scratch.resize(n, 0.0);
        let r = dt * diffusion / (dy * dy);
        self.lower[0] = 0.0;
        self.diag[0] = 1.0 + 2.0 * r;
        self.upper[0] = -2.0 * r;
        for i in 1..n {
            let (_, g) = transform::coefficients(s, s_prime, i as f64 * dy);
            let lambda = g * dt / dy;
            if lambda <= 2.0 * r {
                self.lower[i] = -(r - 0.5 * lambda);
                self.diag[i] = 1.0 + 2.0 * r;
                self.upper[i] = -(r + 0.5 * lambda);
            } else {
                self.lower[i] = -r;
                self.diag[i] = 1.0 + 2.0 * r + lambda;
                self.upper[i] = -(r + lambda);
            }
        }
        tridiag::solve_in_place(&self.lower, &self.diag, &self.upper, values, &mut self.scratch);
    }
}

/// One step with the default second-order stencil and no sources.
pub fn advance_step(state: &FixedDomainState, spec: &ProblemSpec, dt: f64) -> Result<FixedDomainState, SolverError> {
    Stepper::new(*spec, BoundaryStencil::SecondOrder, false)
        .advance(state, dt)
        .map(|step| step.state)
}

/// Initial fixed-domain state of a validated problem.
pub fn initial_state(
    problem: &ValidatedProblem,
    config: &SolverConfig,
    shifts: (f64, f64),
) -> Result<FixedDomainState, SolverError> {
    let (w, z) = problem.initial_profiles(config.n);
    let stepper = Stepper::from_config(problem.spec, config);
    let (s_prime, _) = stepper.speed_of(&w, &z, problem.spec.s0)?;
    Ok(FixedDomainState {
        t: 0.0,
        s: problem.spec.s0,
        s_prime,
        w,
        z,
        shift_a: shifts.0,
        shift_b: shifts.1,
    })
}

/// One member of a lockstep ensemble.
#[derive(Debug, Clone, Copy)]
pub struct Member<'a> {
    pub problem: &'a ValidatedProblem,
    pub shifts: (f64, f64),
}

/// Integrates one problem until `t_end`, the blow-up threshold, or a step collapse.
pub fn simulate(
    problem: &ValidatedProblem,
    config: &SolverConfig,
    shifts: (f64, f64),
) -> Result<Trajectory, SolverError> {
    let mut runs = simulate_lockstep(&[Member { problem, shifts }], config)?;
    Ok(runs.remove(0))
}

/// Integrates several problems on one shared step sequence.
///
/// The step is the minimum of every member's stable step, so pointwise
/// comparisons between members happen at identical times. The ensemble stops
/// as soon as any member terminates.
pub fn simulate_lockstep(members: &[Member<'_>], config: &SolverConfig) -> Result<Vec<Trajectory>, SolverError> {
    config.validate()?;
    if members.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(bad) = members.iter().find(|m| !(m.shifts.0 >= 0.0 && m.shifts.1 >= 0.0)) {
        return Err(SolverError::Config(format!("shifts must be non-negative (got {:?})", bad.shifts)));
    }

    let mut steppers: Vec<Stepper> = members
        .iter()
        .map(|m| Stepper::from_config(m.problem.spec, config))
        .collect();
    let mut states = Vec::with_capacity(members.len());
    let mut trajs = Vec::with_capacity(members.len());
    for m in members {
        let state = initial_state(m.problem, config, m.shifts)?;
        let mut traj = Trajectory::start(m.problem.spec, m.shifts, config.blowup_threshold, &state);
        if !m.problem.spec.lipschitz() && m.shifts == (0.0, 0.0) {
            traj.warnings
                .push("maximal-solution approximation; prefer cascade".to_string());
        }
        states.push(state);
        trajs.push(traj);
    }

    let targets = config.targets();
    let mut next_target = 0;
    let mut t = 0.0;
    let mut first = true;

    // (member index, own status, own reason) of whoever ends the run
    let ended: Option<(usize, RunStatus, StopReason)> = 'outer: loop {
        if next_target == targets.len() {
            break None;
        }
        let mut dt = f64::INFINITY;
        for (k, (state, m)) in states.iter().zip(members).enumerate() {
            match choose_dt(state, &m.problem.spec, config) {
                Ok(step) => dt = dt.min(step),
                Err(SolverError::StepCollapse { t, dt }) => {
                    break 'outer Some((k, RunStatus::BlowupDetected, StopReason::StepCollapse { t, dt }));
                }
                Err(e) => return Err(e),
            }
        }
        if first {
            dt = dt.min(config.dt_init);
            first = false;
        }

        let accepted = loop {
            let remaining = targets[next_target] - t;
            let hits = remaining <= dt;
            let dt_try = if hits { remaining } else { dt };
            let mut results = Vec::with_capacity(states.len());
            let mut rejected = None;
            for (k, (stepper, state)) in steppers.iter_mut().zip(&states).enumerate() {
                match stepper.advance(state, dt_try) {
                    Ok(step) => results.push(step),
                    Err(SolverError::StepRejected { .. }) => {
                        rejected = Some(k);
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            match rejected {
                None => break (results, hits),
                Some(k) => {
                    dt = 0.5 * dt_try;
                    if dt < config.dt_min {
                        break 'outer Some((k, RunStatus::StepFailure, StopReason::Rejections { t, dt }));
                    }
                }
            }
        };

        let (results, hits) = accepted;
        t = if hits { targets[next_target] } else { results[0].state.t };
        let mut crossed = None;
        for (k, ((step, state), traj)) in results.into_iter().zip(states.iter_mut()).zip(trajs.iter_mut()).enumerate() {
            *state = step.state;
            state.t = t;
            traj.clamp_events += step.clamps;
            traj.floored_speeds += u64::from(step.floored);
            traj.node_updates += 2 * state.n() as u64;
            traj.record(state);
            if hits {
                traj.snapshot(state);
            }
            let peak = sup(&state.w).max(sup(&state.z));
            if peak >= config.blowup_threshold && crossed.is_none() {
                crossed = Some((k, peak));
            }
        }
        if hits {
            next_target += 1;
        }
        if let Some((k, peak)) = crossed {
            break Some((k, RunStatus::BlowupDetected, StopReason::Threshold { t, sup: peak }));
        }
    };

    for (k, (traj, state)) in trajs.iter_mut().zip(&states).enumerate() {
        traj.snapshot(state);
        match ended {
            None => {
                traj.status = RunStatus::Completed;
                traj.stop = StopReason::Horizon;
            }
            Some((who, status, reason)) if who == k => {
                traj.status = status;
                traj.stop = reason;
            }
            Some(_) => {
                traj.status = RunStatus::Running;
                traj.stop = StopReason::PartnerStopped { t };
            }
        }
    }
    Ok(trajs)
}
