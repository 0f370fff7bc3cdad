//! Empirical blow-up detection.
//!
//! A run is flagged when its sup-norm crosses the configured threshold or
//! when the stable step collapses. The blow-up time is then extrapolated by
//! fitting `sup_u^{-(pq-1)}` linearly in `t`; this scaling is a heuristic
//! and the estimate is dropped when the fit is poor.

use crate::state::{StopReason, Trajectory};
use crate::verdict::{BlowUpEvidence, BlowUpTrigger, TmaxEstimate};

/// Samples used by the extrapolation.
pub const FIT_SAMPLES: usize = 10;

/// Largest accepted RMS residual, relative to the range of the fitted values.
pub const FIT_RESIDUAL_FRACTION: f64 = 0.1;

pub fn detect_blowup(traj: &Trajectory) -> Option<BlowUpEvidence> {
    if traj.len() < 3 {
        return None;
    }
    let crossing = (0..traj.len()).find(|&k| traj.sup_u[k].max(traj.sup_v[k]) >= traj.blowup_threshold);
    let (end, t_cross, trigger) = match (crossing, traj.stop) {
        (Some(k), _) => (k + 1, traj.times[k], BlowUpTrigger::Threshold),
        (None, StopReason::StepCollapse { t, .. }) => (traj.len(), t, BlowUpTrigger::DtCollapse),
        _ => return None,
    };
    let start = end.saturating_sub(FIT_SAMPLES);
    Some(BlowUpEvidence {
        t_cross,
        trigger,
        threshold: traj.blowup_threshold,
        t_max_estimate: fit_t_max(&traj.times[start..end], &traj.sup_u[start..end], traj.spec.pq()),
    })
}

/// Least-squares extrapolation of `sup^{-(pq-1)}` to zero.
pub fn fit_t_max(times: &[f64], sups: &[f64], pq: f64) -> Option<TmaxEstimate> {
    if pq <= 1.0 || times.len() < 3 || times.len() != sups.len() {
        return None;
    }
    let ys: Vec<f64> = sups.iter().map(|s| s.powf(-(pq - 1.0))).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return None;
    }
    let n = times.len() as f64;
    let t_mean = times.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in times.iter().zip(&ys) {
        sxy += (t - t_mean) * (y - y_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return None;
    }
    let intercept = y_mean - slope * t_mean;
    let residual = (times
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - (intercept + slope * t)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let range = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if residual > FIT_RESIDUAL_FRACTION * range {
        return None;
    }
    Some(TmaxEstimate {
        t_max: -intercept / slope,
        residual,
        range,
    })
}
