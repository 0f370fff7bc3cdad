use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::state::{RunStatus, Trajectory};

/// Minimum number of samples in the tail window.
pub const MIN_TAIL_SAMPLES: usize = 10;

/// Tail front speed below which the front counts as settled.
pub const SETTLED_SPEED: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub s_inf_estimate: f64,
    pub front_speed_tail_max: f64,
    pub sup_u_tail_start: f64,
    pub sup_u_end: f64,
    pub sup_v_end: f64,
    pub tail_samples: usize,
    /// Exponential rate `λ` of `sup_u ~ C e^{-λ t}` over the tail.
    pub decay_rate: Option<f64>,
    pub fit_residual: Option<f64>,
    /// Bounded-run decay picture observed on the finite horizon.
    pub consistent_with_decay: bool,
    pub note: String,
}

/// Long-time diagnostics over the last `tail_fraction` of the time window.
pub fn decay_diagnostic(traj: &Trajectory, tail_fraction: f64) -> Result<DecayReport, AnalysisError> {
    let (Some(&t0), Some(&t1)) = (traj.times.first(), traj.times.last()) else {
        return Err(AnalysisError::TooShort { samples: 0 });
    };
    let cut = t1 - tail_fraction.clamp(0.0, 1.0) * (t1 - t0);
    let start = traj.times.partition_point(|&t| t < cut);
    let tail = start..traj.len();
    if tail.len() < MIN_TAIL_SAMPLES {
        return Err(AnalysisError::TooShort { samples: tail.len() });
    }
    let times = &traj.times[tail.clone()];
    let sup_u = &traj.sup_u[tail.clone()];
    let speed_max = traj.front_speeds[tail.clone()]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));

    let (decay_rate, fit_residual) = if sup_u.iter().all(|&v| v > 0.0) {
        let logs: Vec<f64> = sup_u.iter().map(|v| v.ln()).collect();
        let (slope, residual) = linear_fit(times, &logs);
        (Some(-slope + 0.0), Some(residual))
    } else {
        (None, None)
    };

    let monotone = sup_u.windows(2).all(|w| w[1] <= w[0]) && sup_u[sup_u.len() - 1] < sup_u[0];
    let completed = traj.status == RunStatus::Completed;
    let consistent_with_decay = completed && monotone && speed_max < SETTLED_SPEED;
    let note = if !completed {
        format!("run status {:?}; decay not assessed", traj.status)
    } else if consistent_with_decay {
        "decay consistent with a bounded global solution with finite front limit".to_string()
    } else if !monotone {
        "sup_u not decreasing over the tail".to_string()
    } else {
        format!("front still moving: tail speed {speed_max}")
    };

    Ok(DecayReport {
        s_inf_estimate: traj.fronts[traj.len() - 1],
        front_speed_tail_max: speed_max,
        sup_u_tail_start: sup_u[0],
        sup_u_end: sup_u[sup_u.len() - 1],
        sup_v_end: traj.sup_v[traj.len() - 1],
        tail_samples: tail.len(),
        decay_rate,
        fit_residual,
        consistent_with_decay,
        note,
    })
}

/// Least-squares slope and RMS residual.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let residual = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - ym - slope * (x - xm)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemSpec;

    fn spec() -> ProblemSpec {
        ProblemSpec {
            d1: 1.0,
            d2: 1.0,
            p: 2.0,
            q: 2.0,
            mu: 1.0,
            rho: 1.0,
            s0: 1.0,
        }
    }

    fn traj(sup: impl Fn(f64) -> f64, status: RunStatus) -> Trajectory {
        let times: Vec<f64> = (0..40).map(|k| k as f64 * 0.25).collect();
        let sups: Vec<f64> = times.iter().map(|&t| sup(t)).collect();
        let fronts = vec![1.5; times.len()];
        Trajectory::from_series(spec(), times, fronts, sups.clone(), sups, 1e8, status)
    }

    #[test]
    fn exponential_decay_is_flagged() {
        let report = decay_diagnostic(&traj(|t| 0.1 * (-2.0 * t).exp(), RunStatus::Completed), 0.5).unwrap();
        assert!(report.consistent_with_decay);
        assert!((report.decay_rate.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(report.s_inf_estimate, 1.5);
    }

    #[test]
    fn constant_series_is_not_decay() {
        let report = decay_diagnostic(&traj(|_| 0.3, RunStatus::Completed), 0.5).unwrap();
        assert_eq!(report.decay_rate, Some(0.0));
        assert!(!report.consistent_with_decay);
    }

    #[test]
    fn blowup_run_is_not_assessed() {
        let report = decay_diagnostic(&traj(|t| (-t).exp(), RunStatus::BlowupDetected), 0.5).unwrap();
        assert!(!report.consistent_with_decay);
        assert!(report.note.contains("BlowupDetected"));
    }

    #[test]
    fn short_tail_is_rejected() {
        let t = traj(|t| (-t).exp(), RunStatus::Completed);
        assert!(matches!(decay_diagnostic(&t, 0.1), Err(AnalysisError::TooShort { .. })));
    }
}
