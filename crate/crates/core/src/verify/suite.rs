use serde::{Deserialize, Serialize};

use super::canonical::{self, CASCADE_SCHEDULE, SHIFTED_UPPER};
use super::{check_ordering, compare_ordered_runs, Direction, OrderingReport, RunInput, VerifyError, ORDERING_TOL};
use crate::analysis::{
    certify_global, decay_diagnostic, detect_blowup, find_eps, fit_t_max, front_speed_bound, SuperSolution,
};
use crate::cascade::{run_cascade, CascadeError, CascadeResult, DEFAULT_TOL};
use crate::solver::{run_mms, simulate, BoundaryStencil, SolverConfig};
use crate::state::{RunStatus, Trajectory};
use crate::verdict::RunVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub ordering_tol: f64,
    /// Replace the boundary slope stencil by its first-order variant.
    pub corrupt_stencil: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            ordering_tol: ORDERING_TOL,
            corrupt_stencil: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Fails at the requested tolerance but passes at the default one.
    ToleranceSensitive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn status_of(&self, name: &str) -> Option<CheckStatus> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.status)
    }

    /// 0 all green, 3 only tolerance-sensitive failures, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.status == CheckStatus::Fail) {
            4
        } else if self.all_pass() {
            0
        } else {
            3
        }
    }
}

struct Suite {
    config: SuiteConfig,
    checks: Vec<Check>,
}

impl Suite {
    fn record(&mut self, name: &str, outcome: Graded) {
        let (status, detail) = outcome.unwrap_or_else(|e| (CheckStatus::Fail, e));
        self.checks.push(Check {
            name: name.to_string(),
            status,
            detail,
        });
    }

    fn pass_if(cond: bool, detail: String) -> Graded {
        if cond {
            Ok((CheckStatus::Pass, detail))
        } else {
            Err(detail)
        }
    }

    /// Grades a report computed at the requested tolerance, re-checking at the
    /// default tolerance when it fails.
    fn grade_ordering(&self, at_tol: &OrderingReport, recheck: impl Fn(f64) -> OrderingReport) -> (CheckStatus, String) {
        let detail = |r: &OrderingReport| {
            format!(
                "tol {:e}: {} points, {} violations, max |diff| {:e}",
                r.tol, r.checked, r.violations, r.max_abs_diff
            )
        };
        if at_tol.holds() {
            return (CheckStatus::Pass, detail(at_tol));
        }
        if self.config.ordering_tol < ORDERING_TOL && recheck(ORDERING_TOL).holds() {
            return (CheckStatus::ToleranceSensitive, detail(at_tol));
        }
        (CheckStatus::Fail, detail(at_tol))
    }
}

fn verdict_detail(v: &RunVerdict) -> String {
    format!("{v:?}")
}

type Graded = Result<(CheckStatus, String), String>;

fn speed_and_sign_checks(runs: &[(&str, &Trajectory)]) -> (Graded, Graded) {
    let mut monotone = Ok((CheckStatus::Pass, String::new()));
    let mut positive = Ok((CheckStatus::Pass, String::new()));
    let mut notes_m = Vec::new();
    let mut notes_p = Vec::new();
    for (name, traj) in runs {
        let dips = traj.fronts.windows(2).filter(|w| w[1] < w[0]).count();
        let negative_speed = traj.front_speeds.iter().any(|&v| v < 0.0);
        if dips > 0 || negative_speed {
            monotone = Err(format!("{name}: {dips} front decreases"));
        }
        notes_m.push(format!("{name}: s {:.6} -> {:.6}", traj.fronts[0], traj.fronts[traj.len() - 1]));
        let negative = traj
            .snapshots
            .iter()
            .any(|s| s.w.iter().chain(&s.z).any(|&v| v < 0.0));
        let ratio = traj.clamp_ratio();
        if negative || ratio > 1e-3 {
            positive = Err(format!("{name}: negative values {negative}, clamp ratio {ratio:e}"));
        }
        notes_p.push(format!("{name}: clamp ratio {ratio:e}"));
    }
    (
        monotone.map(|(s, _)| (s, notes_m.join("; "))),
        positive.map(|(s, _)| (s, notes_p.join("; "))),
    )
}

/// Runs the canonical problem set and checks every cross-module invariant.
/// Failures are collected; the suite never stops early.
pub fn property_suite(config: SuiteConfig) -> SuiteReport {
    let stencil = if config.corrupt_stencil {
        BoundaryStencil::FirstOrder
    } else {
        BoundaryStencil::SecondOrder
    };
    let mut suite = Suite {
        config,
        checks: Vec::new(),
    };

    let mms = run_mms(&canonical::mms_spec(), &canonical::mms_config(stencil));
    suite.record(
        "mms_order",
        mms.map_err(|e| e.to_string()).and_then(|table| {
            let order = table.min_order().unwrap_or(f64::NAN);
            Suite::pass_if(
                order >= 1.8 && table.front_error_decreasing(),
                format!("min observed order {order:.3}, front error decreasing {}", table.front_error_decreasing()),
            )
        }),
    );

    let (small, small_cfg) = canonical::small_data(20.0, stencil);
    let small_run = simulate(&small, &small_cfg, (0.0, 0.0));
    let (_, long_cfg) = canonical::small_data(50.0, stencil);
    let long_run = simulate(&small, &long_cfg, (0.0, 0.0));
    let (pq1, pq1_cfg) = canonical::pq_one(stencil);
    let pq1_run = simulate(&pq1, &pq1_cfg, (0.0, 0.0));
    let (big, big_cfg) = canonical::blowup(stencil);
    let big_run = simulate(&big, &big_cfg, (0.0, 0.0));

    suite.record(
        "small_data_certified",
        small_run.as_ref().map_err(|e| e.to_string()).and_then(|traj| {
            let v = certify_global(traj);
            Suite::pass_if(matches!(v, RunVerdict::GlobalCertified { .. }), verdict_detail(&v))
        }),
    );
    suite.record(
        "decay_consistent",
        long_run.as_ref().map_err(|e| e.to_string()).and_then(|traj| {
            let report = decay_diagnostic(traj, 0.2).map_err(|e| e.to_string())?;
            Suite::pass_if(report.consistent_with_decay, report.note)
        }),
    );
    suite.record(
        "front_speed_bound",
        small_run.as_ref().map_err(|e| e.to_string()).and_then(|traj| {
            let s0 = small.spec.s0;
            let bound = front_speed_bound(
                traj.max_sup(),
                &small.spec,
                small.data.u0.c1_norm(s0),
                small.data.v0.c1_norm(s0),
            )
            .map_err(|e| e.to_string())?;
            let worst = traj.front_speeds.iter().cloned().fold(0.0, f64::max);
            Suite::pass_if(worst <= 1.05 * bound, format!("max s' {worst:e}, bound {bound:e}"))
        }),
    );
    suite.record(
        "pq_le_one_global",
        pq1_run.as_ref().map_err(|e| e.to_string()).and_then(|traj| {
            let v = certify_global(traj);
            Suite::pass_if(
                matches!(v, RunVerdict::GlobalHeuristic { .. }) && traj.status == RunStatus::Completed,
                verdict_detail(&v),
            )
        }),
    );
    suite.record(
        "blowup_detected",
        big_run.as_ref().map_err(|e| e.to_string()).and_then(|traj| {
            let v = certify_global(traj);
            let early = detect_blowup(traj).is_some_and(|ev| ev.t_cross < 1.0);
            Suite::pass_if(v.is_blowup() && early, verdict_detail(&v))
        }),
    );
    match (&small_run, &pq1_run, &big_run) {
        (Ok(a), Ok(b), Ok(c)) => {
            let (monotone, positive) = speed_and_sign_checks(&[("small", a), ("pq1", b), ("blowup", c)]);
            suite.record("front_monotone", monotone);
            suite.record("positivity", positive);
        }
        _ => {
            suite.record("front_monotone", Err("a canonical run failed".to_string()));
            suite.record("positivity", Err("a canonical run failed".to_string()));
        }
    }

    let (casc, casc_cfg) = canonical::cascade(stencil);
    let cascade = match run_cascade(&casc, &casc_cfg, &CASCADE_SCHEDULE, DEFAULT_TOL) {
        Ok(result) => Ok(result),
        Err(CascadeError::NoConvergence { result, .. }) => Ok(*result),
        Err(e) => Err(e.to_string()),
    };
    let graded = cascade.map(|result: CascadeResult| {
        let mut status = CheckStatus::Pass;
        let mut details = Vec::new();
        for pair in result.levels.windows(2) {
            let report = check_ordering(&pair[1].trajectory, &pair[0].trajectory, config.ordering_tol, Direction::AtMost);
            let (s, d) = suite.grade_ordering(&report, |tol| {
                check_ordering(&pair[1].trajectory, &pair[0].trajectory, tol, Direction::AtMost)
            });
            if s != CheckStatus::Pass && status != CheckStatus::Fail {
                status = s;
            }
            details.push(d);
        }
        if !result.differences_non_increasing() {
            status = CheckStatus::Fail;
            details.push(format!("differences not non-increasing: {:?}", result.differences));
        }
        (status, details.join("; "))
    });
    suite.record("cascade_ordering", graded);

    let (lo, hi, pair_cfg) = canonical::doubled_pair(stencil);
    let doubled = ordered_pair(&suite, (&lo, (0.0, 0.0)), (&hi, (0.0, 0.0)), &pair_cfg);
    suite.record("pair_doubled_amplitude", doubled);
    let (sh, sh_cfg) = canonical::shifted_pair(stencil);
    let shifted = ordered_pair(&suite, (&sh, (0.0, 0.0)), (&sh, SHIFTED_UPPER), &sh_cfg);
    suite.record("pair_shifted", shifted);
    let reflexive = compare_ordered_runs(
        RunInput { problem: &lo, shifts: (0.0, 0.0) },
        RunInput { problem: &lo, shifts: (0.0, 0.0) },
        &pair_cfg,
        config.ordering_tol,
    )
    .map_err(|e| e.to_string())
    .and_then(|o| {
        Suite::pass_if(
            o.report.max_abs_diff == 0.0 && o.report.holds(),
            format!("max |diff| {:e}", o.report.max_abs_diff),
        )
    });
    suite.record("pair_reflexive", reflexive);

    let short = SolverConfig {
        t_end: 0.5,
        snapshot_times: canonical::every(0.1, 0.5),
        ..casc_cfg.clone()
    };
    let mixed = canonical::parabola(crate::problem::ProblemSpec { d2: 0.5, rho: 2.0, ..canonical::unit_spec(2.0, 1.5) }, 2.0, 64);
    suite.record(
        "determinism",
        simulate(&mixed, &short, (0.0, 0.0))
            .and_then(|a| simulate(&mixed, &short, (0.0, 0.0)).map(|b| (a, b)))
            .map_err(|e| e.to_string())
            .and_then(|(a, b)| Suite::pass_if(a == b, format!("{} steps", a.len()))),
    );
    suite.record(
        "swap_symmetry",
        simulate(&mixed, &short, (0.0, 0.0))
            .and_then(|a| simulate(&mixed.swapped(), &short, (0.0, 0.0)).map(|b| (a, b)))
            .map_err(|e| e.to_string())
            .and_then(|(a, b)| swap_matches(&a, &b)),
    );

    suite.record("supersolution_inequalities", supersolution_check());
    suite.record("blowup_fit_synthetic", {
        let pq: f64 = 4.0;
        let times: Vec<f64> = (0..10).map(|k| 0.8 + 0.15 * k as f64 / 9.0).collect();
        let sups: Vec<f64> = times.iter().map(|t| (1.0 - t).powf(-1.0 / (pq - 1.0))).collect();
        match fit_t_max(&times, &sups, pq) {
            Some(est) => Suite::pass_if((est.t_max - 1.0).abs() <= 0.02, format!("T_max estimate {}", est.t_max)),
            None => Err("fit rejected".to_string()),
        }
    });

    SuiteReport {
        config,
        checks: suite.checks,
    }
}

fn ordered_pair(
    suite: &Suite,
    lower: (&crate::problem::ValidatedProblem, (f64, f64)),
    upper: (&crate::problem::ValidatedProblem, (f64, f64)),
    config: &SolverConfig,
) -> Graded {
    let run = |tol| {
        compare_ordered_runs(
            RunInput { problem: lower.0, shifts: lower.1 },
            RunInput { problem: upper.0, shifts: upper.1 },
            config,
            tol,
        )
    };
    match run(suite.config.ordering_tol) {
        Ok(o) => Ok((CheckStatus::Pass, format!("{:?}: {} points, margin {:e}", o.variant, o.report.checked, o.report.min_margin))),
        Err(VerifyError::OrderingViolation { outcome, .. }) => {
            let o = *outcome;
            let (status, detail) = suite.grade_ordering(&o.report, |tol| check_ordering(&o.lower, &o.upper, tol, Direction::AtMost));
            Ok((status, detail))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn swap_matches(a: &Trajectory, b: &Trajectory) -> Graded {
    let same_series = a.times == b.times && a.fronts == b.fronts && a.sup_u == b.sup_v && a.sup_v == b.sup_u;
    let same_fields = a.snapshots.len() == b.snapshots.len()
        && a.snapshots.iter().zip(&b.snapshots).all(|(x, y)| x.w == y.z && x.z == y.w);
    Suite::pass_if(same_series && same_fields, format!("{} steps compared", a.len()))
}

fn supersolution_check() -> Graded {
    let spec = canonical::unit_spec(2.0, 2.0);
    let eps = find_eps(&spec).ok().and_then(|s| s.eps()).ok_or("no certificate amplitude")?;
    let barrier = SuperSolution::new(&spec, eps, eps).map_err(|e| e.to_string())?;
    let horizon = barrier.valid_until().min(40.0);
    if !(horizon >= 20.0) {
        return Err(format!("barrier valid only until t = {horizon}"));
    }
    let mut worst = f64::INFINITY;
    for i in 0..=50 {
        let t = horizon * i as f64 / 50.0;
        worst = worst.min(barrier.front_residual(t));
        let s = barrier.front(t);
        for j in 0..=50 {
            let x = s * j as f64 / 50.0;
            worst = worst.min(barrier.residual_u(t, x)).min(barrier.residual_v(t, x));
        }
    }
    Suite::pass_if(worst >= -1e-12, format!("eps {eps:e}, smallest residual {worst:e} on [0, {horizon}]"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(excess: f64) -> (Trajectory, Trajectory) {
        let spec = canonical::unit_spec(2.0, 2.0);
        let times: Vec<f64> = (0..5).map(|k| k as f64 * 0.1).collect();
        let upper: Vec<f64> = times.iter().map(|t| 1.0 + t).collect();
        let lower: Vec<f64> = upper.iter().map(|s| s * (1.0 + excess)).collect();
        let sup = vec![0.5; times.len()];
        let make = |fronts: Vec<f64>| {
            Trajectory::from_series(spec, times.clone(), fronts, sup.clone(), sup.clone(), 1e8, RunStatus::Completed)
        };
        (make(lower), make(upper))
    }

    fn grade(tol: f64, excess: f64) -> CheckStatus {
        let suite = Suite {
            config: SuiteConfig {
                ordering_tol: tol,
                ..SuiteConfig::default()
            },
            checks: Vec::new(),
        };
        let (lo, up) = pair(excess);
        let report = check_ordering(&lo, &up, tol, Direction::AtMost);
        suite.grade_ordering(&report, |t| check_ordering(&lo, &up, t, Direction::AtMost)).0
    }

    #[test]
    fn tolerance_grading() {
        assert_eq!(grade(ORDERING_TOL, 1e-9), CheckStatus::Pass);
        assert_eq!(grade(1e-12, 1e-9), CheckStatus::ToleranceSensitive);
        assert_eq!(grade(1e-12, 1e-3), CheckStatus::Fail);
        assert_eq!(grade(ORDERING_TOL, 1e-3), CheckStatus::Fail);
    }

    #[test]
    fn exit_codes() {
        let check = |status| Check {
            name: "x".into(),
            status,
            detail: String::new(),
        };
        let report = |statuses: &[CheckStatus]| SuiteReport {
            config: SuiteConfig::default(),
            checks: statuses.iter().map(|&s| check(s)).collect(),
        };
        assert_eq!(report(&[CheckStatus::Pass]).exit_code(), 0);
        assert_eq!(report(&[CheckStatus::Pass, CheckStatus::ToleranceSensitive]).exit_code(), 3);
        assert_eq!(report(&[CheckStatus::ToleranceSensitive, CheckStatus::Fail]).exit_code(), 4);
    }
}
