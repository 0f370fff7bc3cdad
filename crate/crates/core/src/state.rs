//! Solver state on the fixed domain and the recorded history of a run.

use serde::{Deserialize, Serialize};

use crate::problem::ProblemSpec;

/// Fields `w(t, y)`, `z(t, y)` on the uniform grid `y_i = i / N` plus the front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedDomainState {
    pub t: f64,
    pub s: f64,
    pub s_prime: f64,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    /// Additive shift in `(w + shift_a)^q`.
    pub shift_a: f64,
    /// Additive shift in `(z + shift_b)^p`.
    pub shift_b: f64,
}

impl FixedDomainState {
    /// Number of grid intervals.
    pub fn n(&self) -> usize {
        self.w.len() - 1
    }

    pub fn dy(&self) -> f64 {
        1.0 / self.n() as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        i as f64 / self.n() as f64
    }

    pub fn sup_w(&self) -> f64 {
        sup(&self.w)
    }

    pub fn sup_z(&self) -> f64 {
        sup(&self.z)
    }

    /// Physical abscissae `x_i = y_i s`.
    pub fn x_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n()).map(move |i| self.y(i) * self.s)
    }

    /// Linear interpolation of `(u, v)` at physical `x ∈ [0, s]`.
    pub fn sample_physical(&self, x: f64) -> (f64, f64) {
        let n = self.n();
        let pos = (x / self.s).clamp(0.0, 1.0) * n as f64;
        let i = (pos.floor() as usize).min(n - 1);
        let frac = pos - i as f64;
        let lerp = |f: &[f64]| f[i] + frac * (f[i + 1] - f[i]);
        (lerp(&self.w), lerp(&self.z))
    }

    /// Dirichlet zeros at `y = 1`, non-negative fields and `s >= s0`.
    pub fn invariants_hold(&self, s0: f64) -> bool {
        let n = self.n();
        self.w[n] == 0.0
            && self.z[n] == 0.0
            && self.w.iter().chain(&self.z).all(|&v| v >= 0.0)
            && self.s >= s0
    }
}

pub(crate) fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, &v| m.max(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Stopped before `t_end` without a trigger of its own (a lockstep partner stopped).
    Running,
    Completed,
    BlowupDetected,
    StepFailure,
}

/// Why the integration loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum StopReason {
    Horizon,
    Threshold { t: f64, sup: f64 },
    StepCollapse { t: f64, dt: f64 },
    /// Repeated step rejections drove `dt` below `dt_min`.
    Rejections { t: f64, dt: f64 },
    PartnerStopped { t: f64 },
}

/// Per-step history of one simulation.
///
/// The per-step series (`times`, `fronts`, ...) have one entry per accepted
/// step plus the initial record. Full profiles are kept only in `snapshots`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub spec: ProblemSpec,
    pub shifts: (f64, f64),
    pub blowup_threshold: f64,
    pub times: Vec<f64>,
    pub fronts: Vec<f64>,
    pub front_speeds: Vec<f64>,
    pub sup_u: Vec<f64>,
    pub sup_v: Vec<f64>,
    pub clamp_cumulative: Vec<u64>,
    pub snapshots: Vec<FixedDomainState>,
    pub clamp_events: u64,
    /// Front speeds that came out negative and were floored to zero.
    pub floored_speeds: u64,
    pub node_updates: u64,
    pub status: RunStatus,
    pub stop: StopReason,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub(crate) fn start(spec: ProblemSpec, shifts: (f64, f64), threshold: f64, initial: &FixedDomainState) -> Self {
        let mut traj = Self {
            spec,
            shifts,
            blowup_threshold: threshold,
            times: Vec::new(),
            fronts: Vec::new(),
            front_speeds: Vec::new(),
            sup_u: Vec::new(),
            sup_v: Vec::new(),
            clamp_cumulative: Vec::new(),
            snapshots: vec![initial.clone()],
            clamp_events: 0,
            floored_speeds: 0,
            node_updates: 0,
            status: RunStatus::Running,
            stop: StopReason::Horizon,
            warnings: Vec::new(),
        };
        traj.record(initial);
        traj
    }

    pub(crate) fn record(&mut self, state: &FixedDomainState) {
        self.times.push(state.t);
        self.fronts.push(state.s);
        self.front_speeds.push(state.s_prime);
        self.sup_u.push(state.sup_w());
        self.sup_v.push(state.sup_z());
        self.clamp_cumulative.push(self.clamp_events);
    }

    pub(crate) fn snapshot(&mut self, state: &FixedDomainState) {
        if self.snapshots.last().map(|s| s.t) != Some(state.t) {
            self.snapshots.push(state.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_last(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Last stored profile; `None` only for series built with [`Trajectory::from_series`].
    pub fn final_state(&self) -> Option<&FixedDomainState> {
        self.snapshots.last()
    }

    pub fn initial_state(&self) -> Option<&FixedDomainState> {
        self.snapshots.first()
    }

    /// A profile-free trajectory from scalar series, for running the
    /// diagnostics on externally produced data.
    pub fn from_series(
        spec: ProblemSpec,
        times: Vec<f64>,
        fronts: Vec<f64>,
        sup_u: Vec<f64>,
        sup_v: Vec<f64>,
        blowup_threshold: f64,
        status: RunStatus,
    ) -> Self {
        let len = times.len();
        let front_speeds = fronts
            .windows(2)
            .zip(times.windows(2))
            .map(|(s, t)| (s[1] - s[0]) / (t[1] - t[0]))
            .chain(std::iter::once(0.0))
            .take(len)
            .collect();
        Self {
            spec,
            shifts: (0.0, 0.0),
            blowup_threshold,
            times,
            fronts,
            front_speeds,
            sup_u,
            sup_v,
            clamp_cumulative: vec![0; len],
            snapshots: Vec::new(),
            clamp_events: 0,
            floored_speeds: 0,
            node_updates: 0,
            status,
            stop: StopReason::Horizon,
            warnings: Vec::new(),
        }
    }

    /// Largest value of either component over the whole run.
    pub fn max_sup(&self) -> f64 {
        self.sup_u.iter().chain(&self.sup_v).fold(0.0f64, |m, &v| m.max(v))
    }

    pub fn clamp_ratio(&self) -> f64 {
        if self.node_updates == 0 {
            0.0
        } else {
            self.clamp_events as f64 / self.node_updates as f64
        }
    }

    /// Times strictly increasing and fronts non-decreasing.
    pub fn is_monotone(&self) -> bool {
        self.times.windows(2).all(|w| w[1] > w[0]) && self.fronts.windows(2).all(|w| w[1] >= w[0])
    }
}
