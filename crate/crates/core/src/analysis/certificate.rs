//! Small-data global existence certificate.
//!
//! For `pq > 1` the explicit barrier
//!
//! ```text
//! s̄(t) = 2 s0 (2 - e^{-a t})
//! ū(t, x) = ε1 e^{-b t} (1 - (x/s̄)^2)
//! v̄(t, x) = ε2 e^{-γ t} (1 - (x/s̄)^2)
//! ```
//!
//! with `a = b = γ p = d / (16 s0^2)`, `d = min(d1, d2)`, is a super-solution
//! whenever `(ε1, ε2)` is feasible. Initial data below half the amplitudes
//! then stay below the barrier forever.

use serde::{Deserialize, Serialize};

use super::blowup::detect_blowup;
use super::AnalysisError;
use crate::problem::ProblemSpec;
use crate::state::{RunStatus, Trajectory};
use crate::verdict::RunVerdict;

/// Absolute slack of the numerical domination check.
pub const DOMINATION_TOL: f64 = 1e-8;

/// Relative width of the bracket returned by [`find_eps`].
pub const EPS_SEARCH_TOL: f64 = 1e-6;

/// One failed condition of the small-data feasibility test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum SmallDataFailure {
    /// `ε1 d - 16 s0^2 ε2^p < 0`
    FirstInequality { value: f64 },
    /// `ε2 d - 16 s0^2 ε1^q < 0`
    SecondInequality { value: f64 },
    /// `ε >= d / (8 mu (1 + rho))`
    AmplitudeCap { eps: f64, cap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Feasibility {
    Feasible,
    Infeasible(Vec<SmallDataFailure>),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

/// Strict upper bound `d / (8 mu (1 + rho))` on both amplitudes.
pub fn amplitude_cap(spec: &ProblemSpec) -> f64 {
    spec.d_min() / (8.0 * spec.mu * (1.0 + spec.rho))
}

pub fn check_small_data(spec: &ProblemSpec, eps1: f64, eps2: f64) -> Result<Feasibility, AnalysisError> {
    if spec.pq() <= 1.0 {
        return Err(AnalysisError::WrongRegime { pq: spec.pq() });
    }
    if !(eps1 > 0.0 && eps2 > 0.0) {
        return Err(AnalysisError::InvalidEps { eps1, eps2 });
    }
    let d = spec.d_min();
    let scale = 16.0 * spec.s0 * spec.s0;
    let cap = amplitude_cap(spec);
    let mut failures = Vec::new();
    let first = eps1 * d - scale * eps2.powf(spec.p);
    if first < 0.0 {
        failures.push(SmallDataFailure::FirstInequality { value: first });
    }
    let second = eps2 * d - scale * eps1.powf(spec.q);
    if second < 0.0 {
        failures.push(SmallDataFailure::SecondInequality { value: second });
    }
    for eps in [eps1, eps2] {
        if eps >= cap {
            failures.push(SmallDataFailure::AmplitudeCap { eps, cap });
        }
    }
    Ok(if failures.is_empty() {
        Feasibility::Feasible
    } else {
        Feasibility::Infeasible(failures)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EpsSearch {
    Found(f64),
    /// No symmetric amplitude works; carries the failures at the last probe.
    None { failures: Vec<SmallDataFailure> },
}

impl EpsSearch {
    pub fn eps(&self) -> Option<f64> {
        match self {
            EpsSearch::Found(eps) => Some(*eps),
            EpsSearch::None { .. } => None,
        }
    }
}

/// Largest feasible symmetric amplitude `ε1 = ε2 = ε`.
///
/// Each condition is a one-sided bound on `ε`, so the feasible set is an
/// interval. A geometric scan down from the cap brackets its upper end,
/// which bisection then narrows to [`EPS_SEARCH_TOL`].
pub fn find_eps(spec: &ProblemSpec) -> Result<EpsSearch, AnalysisError> {
    let feasible = |eps: f64| check_small_data(spec, eps, eps);
    let cap = amplitude_cap(spec);
    let mut hi = cap;
    let mut lo = None;
    let mut last_failures = Vec::new();
    let mut eps = cap;
    for _ in 0..1100 {
        eps *= 0.5;
        if eps == 0.0 {
            break;
        }
        match feasible(eps)? {
            Feasibility::Feasible => {
                lo = Some(eps);
                break;
            }
            Feasibility::Infeasible(failures) => {
                last_failures = failures;
                hi = eps;
            }
        }
    }
    let Some(mut lo) = lo else {
        return Ok(EpsSearch::None {
            failures: last_failures,
        });
    };
    while hi - lo > EPS_SEARCH_TOL * lo {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)?.is_feasible() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EpsSearch::Found(lo))
}

/// The closed-form barrier as an evaluable object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperSolution {
    pub eps1: f64,
    pub eps2: f64,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub s0: f64,
    spec: ProblemSpec,
}

impl SuperSolution {
    pub fn new(spec: &ProblemSpec, eps1: f64, eps2: f64) -> Result<Self, AnalysisError> {
        if let Feasibility::Infeasible(failures) = check_small_data(spec, eps1, eps2)? {
            return Err(AnalysisError::Infeasible(failures));
        }
        let b = spec.d_min() / (16.0 * spec.s0 * spec.s0);
        Ok(Self {
            eps1,
            eps2,
            a: b,
            b,
            gamma: b / spec.p,
            s0: spec.s0,
            spec: *spec,
        })
    }

    pub fn front(&self, t: f64) -> f64 {
        2.0 * self.s0 * (2.0 - (-self.a * t).exp())
    }

    pub fn front_speed(&self, t: f64) -> f64 {
        2.0 * self.s0 * self.a * (-self.a * t).exp()
    }

    /// `(s̄, ū, v̄)` at `(t, x)`.
    pub fn eval(&self, t: f64, x: f64) -> Result<(f64, f64, f64), AnalysisError> {
        let s = self.front(t);
        if !(t >= 0.0) || !(0.0..=s).contains(&x) {
            return Err(AnalysisError::OutOfDomain { t, x });
        }
        let shape = 1.0 - (x / s).powi(2);
        Ok((
            s,
            self.eps1 * (-self.b * t).exp() * shape,
            self.eps2 * (-self.gamma * t).exp() * shape,
        ))
    }

    /// `ū_t - d1 ū_xx - v̄^p`, evaluated analytically.
    pub fn residual_u(&self, t: f64, x: f64) -> f64 {
        self.residual(t, x, self.eps1, self.b, self.spec.d1, self.eps2, self.gamma, self.spec.p)
    }

    /// `v̄_t - d2 v̄_xx - ū^q`, evaluated analytically.
    pub fn residual_v(&self, t: f64, x: f64) -> f64 {
        self.residual(t, x, self.eps2, self.gamma, self.spec.d2, self.eps1, self.b, self.spec.q)
    }

    #[allow(clippy::too_many_arguments)]
    fn residual(&self, t: f64, x: f64, eps: f64, rate: f64, diff: f64, other_eps: f64, other_rate: f64, exponent: f64) -> f64 {
        let s = self.front(t);
        let xi = x / s;
        let shape = 1.0 - xi * xi;
        let decay = eps * (-rate * t).exp();
        let time_derivative = decay * (-rate * shape + 2.0 * xi * xi * self.front_speed(t) / s);
        let second_derivative = -2.0 * decay / (s * s);
        let reaction = (other_eps * (-other_rate * t).exp() * shape).powf(exponent);
        time_derivative - diff * second_derivative - reaction
    }

    /// `s̄' + mu (ū_x + rho v̄_x)` at `x = s̄(t)`.
    pub fn front_residual(&self, t: f64) -> f64 {
        let s = self.front(t);
        let ux = -2.0 * self.eps1 * (-self.b * t).exp() / s;
        let vx = -2.0 * self.eps2 * (-self.gamma * t).exp() / s;
        self.front_speed(t) + self.spec.mu * (ux + self.spec.rho * vx)
    }
}

impl SuperSolution {
    /// Last time up to which every barrier inequality holds, scanned on a grid
    /// of step `0.01 / a` out to `100 / a`; infinite when none fails there.
    ///
    /// With `p > 1` the `v̄` amplitude decays slower than `s̄'`, so the front
    /// inequality eventually fails when `rho > 0`; with `p < 1` the `v̄`
    /// equation can fail instead.
    pub fn valid_until(&self) -> f64 {
        let h = 0.01 / self.a;
        let mut last_good = 0.0;
        for k in 0..=10_000 {
            let t = k as f64 * h;
            let s = self.front(t);
            let scale = (self.eps1 * (-self.b * t).exp()).max(self.eps2 * (-self.gamma * t).exp());
            let pde_ok = (0..=20).all(|j| {
                let x = s * j as f64 / 20.0;
                self.residual_u(t, x) >= -1e-12 * scale && self.residual_v(t, x) >= -1e-12 * scale
            });
            if !(pde_ok && self.front_residual(t) > 0.0) {
                return last_good;
            }
            last_good = t;
        }
        f64::INFINITY
    }
}

/// Smallest barrier margin over a run, or the first place it failed.
fn domination_margin(traj: &Trajectory, barrier: &SuperSolution) -> Result<f64, String> {
    let mut margin = f64::INFINITY;
    for k in 0..traj.len() {
        let t = traj.times[k];
        let (s_bar, u_bar, v_bar) = barrier.eval(t, 0.0).map_err(|e| e.to_string())?;
        let front_gap = s_bar - traj.fronts[k];
        if !(front_gap > 0.0) {
            return Err(format!("front {} reached barrier {s_bar} at t = {t}", traj.fronts[k]));
        }
        for (name, value, bound) in [("sup u", traj.sup_u[k], u_bar), ("sup v", traj.sup_v[k], v_bar)] {
            if value > bound + DOMINATION_TOL {
                return Err(format!("{name} = {value} above barrier {bound} at t = {t}"));
            }
            margin = margin.min(bound - value);
        }
    }
    for snap in &traj.snapshots {
        for (i, x) in snap.x_nodes().enumerate() {
            let (_, u_bar, v_bar) = barrier.eval(snap.t, x).map_err(|e| e.to_string())?;
            for (name, value, bound) in [("u", snap.w[i], u_bar), ("v", snap.z[i], v_bar)] {
                if value > bound + DOMINATION_TOL {
                    return Err(format!("{name} = {value} above barrier {bound} at t = {}, x = {x}", snap.t));
                }
                margin = margin.min(bound - value);
            }
        }
    }
    Ok(margin)
}

/// Classifies a run: blow-up evidence first, then the `pq <= 1` rule, then
/// the small-data certificate with numerical domination.
pub fn certify_global(traj: &Trajectory) -> RunVerdict {
    if let Some(evidence) = detect_blowup(traj) {
        return RunVerdict::BlowUp(evidence);
    }
    let spec = &traj.spec;
    if spec.pq() <= 1.0 {
        return RunVerdict::GlobalHeuristic {
            pq: spec.pq(),
            horizon: traj.t_last(),
        };
    }
    if !matches!(traj.status, RunStatus::Completed | RunStatus::Running) {
        return RunVerdict::Undecided {
            reason: format!("run ended with status {:?}", traj.status),
        };
    }
    let eps = match find_eps(spec) {
        Ok(EpsSearch::Found(eps)) => eps,
        Ok(EpsSearch::None { failures }) => {
            return RunVerdict::Undecided {
                reason: format!("no feasible symmetric amplitude: {failures:?}"),
            }
        }
        Err(e) => return RunVerdict::Undecided { reason: e.to_string() },
    };
    let Some(initial) = traj.initial_state() else {
        return RunVerdict::Undecided {
            reason: "trajectory holds no profiles".into(),
        };
    };
    let (sup_u0, sup_v0) = (initial.sup_w(), initial.sup_z());
    if sup_u0 > 0.5 * eps || sup_v0 > 0.5 * eps {
        return RunVerdict::Undecided {
            reason: format!("initial sup-norms ({sup_u0}, {sup_v0}) exceed eps/2 = {}", 0.5 * eps),
        };
    }
    let barrier = match SuperSolution::new(spec, eps, eps) {
        Ok(b) => b,
        Err(e) => return RunVerdict::Undecided { reason: e.to_string() },
    };
    let valid_until = barrier.valid_until();
    if traj.t_last() > valid_until {
        return RunVerdict::Undecided {
            reason: format!(
                "run horizon {} exceeds the barrier's validity horizon {valid_until}",
                traj.t_last()
            ),
        };
    }
    match domination_margin(traj, &barrier) {
        Ok(margin) => RunVerdict::GlobalCertified {
            eps1: eps,
            eps2: eps,
            margin,
        },
        Err(reason) => RunVerdict::Undecided {
            reason: format!("barrier domination failed: {reason}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: f64, q: f64) -> ProblemSpec {
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

    #[test]
    fn worked_feasibility_examples() {
        let sp = spec(2.0, 2.0);
        assert_eq!(check_small_data(&sp, 1.0 / 32.0, 1.0 / 32.0).unwrap(), Feasibility::Feasible);
        let Feasibility::Infeasible(failures) = check_small_data(&sp, 1.0 / 16.0, 1.0 / 16.0).unwrap() else {
            panic!("1/16 sits on the strict cap");
        };
        assert!(failures
            .iter()
            .all(|f| matches!(f, SmallDataFailure::AmplitudeCap { .. })));
        assert_eq!(failures.len(), 2);
    }

    #[test]
    fn precondition_errors() {
        assert!(matches!(
            check_small_data(&spec(2.0, 2.0), 0.0, 0.01),
            Err(AnalysisError::InvalidEps { .. })
        ));
        assert!(matches!(
            check_small_data(&spec(1.0, 1.0), 0.01, 0.01),
            Err(AnalysisError::WrongRegime { .. })
        ));
        assert!(matches!(find_eps(&spec(0.5, 2.0)), Err(AnalysisError::WrongRegime { .. })));
    }

    #[test]
    fn symmetric_search_hits_one_sixteenth() {
        let eps = find_eps(&spec(2.0, 2.0)).unwrap().eps().unwrap();
        assert!(eps < 1.0 / 16.0);
        assert!((eps - 1.0 / 16.0).abs() / (1.0 / 16.0) < 1e-5, "{eps}");
    }

    /// Dense scan over the symmetric line as an independent oracle.
    fn scan_oracle(sp: &ProblemSpec, samples: usize) -> f64 {
        let cap = amplitude_cap(sp);
        let d = sp.d_min();
        let scale = 16.0 * sp.s0 * sp.s0;
        (1..samples)
            .map(|k| cap * k as f64 / samples as f64)
            .filter(|&e| e * d - scale * e.powf(sp.p) >= 0.0 && e * d - scale * e.powf(sp.q) >= 0.0)
            .fold(0.0, f64::max)
    }

    #[test]
    fn mixed_exponents_match_scan() {
        let sp = spec(2.0, 3.0);
        let eps = find_eps(&sp).unwrap().eps().unwrap();
        let oracle = scan_oracle(&sp, 200_000);
        assert!((eps - oracle).abs() <= amplitude_cap(&sp) / 200_000.0 + 1e-6 * eps, "{eps} vs {oracle}");
    }

    #[test]
    fn sublinear_and_superlinear_pair_matches_scan() {
        let sp = ProblemSpec { d1: 2.0, d2: 3.0, s0: 0.5, ..spec(0.8, 3.0) };
        let found = find_eps(&sp).unwrap();
        let oracle = scan_oracle(&sp, 200_000);
        match found {
            EpsSearch::Found(eps) => assert!((eps - oracle).abs() < 1e-5 * amplitude_cap(&sp) + 1e-6 * eps),
            EpsSearch::None { .. } => assert_eq!(oracle, 0.0),
        }
    }

    #[test]
    fn huge_mu_pins_eps_to_the_cap() {
        let sp = ProblemSpec { mu: 1e6, ..spec(2.0, 2.0) };
        let eps = find_eps(&sp).unwrap().eps().unwrap();
        let cap = amplitude_cap(&sp);
        assert!(eps < cap && (cap - eps) / cap < 1e-5);
    }

    #[test]
    fn barrier_values() {
        let sp = spec(2.0, 2.0);
        let ss = SuperSolution::new(&sp, 1.0 / 32.0, 1.0 / 32.0).unwrap();
        assert_eq!(ss.b, 1.0 / 16.0);
        assert_eq!(ss.gamma, 1.0 / 32.0);
        assert_eq!(ss.a, ss.b);
        assert_eq!(ss.b, ss.gamma * sp.p);
        let (s, u, v) = ss.eval(0.0, 0.0).unwrap();
        assert_eq!((s, u, v), (2.0, 1.0 / 32.0, 1.0 / 32.0));
        let (s_late, u_late, _) = ss.eval(1e3, 0.0).unwrap();
        assert!((s_late - 4.0).abs() < 1e-12 && u_late < 1e-20);
        assert!(ss.eval(0.0, 2.5).is_err());
        assert!(ss.eval(-1.0, 0.0).is_err());
    }

    #[test]
    fn validity_horizon_matches_front_crossing() {
        // 4 - 2 e^{-t/16} = 1 + e^{t/32} has the root t = 32 ln(1 + sqrt 3).
        let sp = spec(2.0, 2.0);
        let eps = find_eps(&sp).unwrap().eps().unwrap();
        let ss = SuperSolution::new(&sp, eps, eps).unwrap();
        let expected = 32.0 * (1.0 + 3f64.sqrt()).ln();
        let got = ss.valid_until();
        assert!(got <= expected && expected - got < 0.2, "{got} vs {expected}");
        assert!(ss.front_residual(0.5 * expected) > 0.0);
        assert!(ss.front_residual(1.1 * expected) < 0.0);
    }

    #[test]
    fn linear_p_barrier_never_expires() {
        let sp = ProblemSpec { d1: 20.0, d2: 20.0, ..spec(1.0, 2.0) };
        let eps = find_eps(&sp).unwrap().eps().unwrap();
        assert_eq!(SuperSolution::new(&sp, eps, eps).unwrap().valid_until(), f64::INFINITY);
    }

    #[test]
    fn residual_formulas_match_finite_differences() {
        let sp = ProblemSpec { d1: 0.7, d2: 1.3, ..spec(1.5, 2.0) };
        let eps = find_eps(&sp).unwrap().eps().unwrap();
        let ss = SuperSolution::new(&sp, eps, eps).unwrap();
        let (t, x) = (0.8, 0.9);
        let h = 1e-4;
        let u = |t: f64, x: f64| ss.eval(t, x).unwrap().1;
        let v = |t: f64, x: f64| ss.eval(t, x).unwrap().2;
        let fd_u = (u(t + h, x) - u(t - h, x)) / (2.0 * h)
            - sp.d1 * (u(t, x + h) - 2.0 * u(t, x) + u(t, x - h)) / (h * h)
            - v(t, x).powf(sp.p);
        let fd_v = (v(t + h, x) - v(t - h, x)) / (2.0 * h)
            - sp.d2 * (v(t, x + h) - 2.0 * v(t, x) + v(t, x - h)) / (h * h)
            - u(t, x).powf(sp.q);
        assert!((ss.residual_u(t, x) - fd_u).abs() < 1e-6 * eps);
        assert!((ss.residual_v(t, x) - fd_v).abs() < 1e-6 * eps);
    }
}
