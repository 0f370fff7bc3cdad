use frontsys_core::analysis::certify_global;
use frontsys_core::cascade::run_cascade;
use frontsys_core::solver::BoundaryStencil;
use frontsys_core::verify::canonical::{self, parabola, unit_spec, CASCADE_SCHEDULE};
use frontsys_core::verify::{check_ordering, Direction, ORDERING_TOL};
use frontsys_core::{simulate, RunStatus, RunVerdict, SolverConfig, StopReason, Trajectory};

fn config(t_end: f64) -> SolverConfig {
    SolverConfig {
        t_end,
        snapshot_times: canonical::every(0.5, t_end),
        ..SolverConfig::default()
    }
}

fn front_increments_ok(traj: &Trajectory) -> bool {
    traj.fronts.windows(2).all(|w| w[1] - w[0] >= -1e-12 * w[0])
}

#[test]
fn small_amplitude_run_completes_and_decays() {
    let problem = parabola(unit_spec(2.0, 2.0), 0.01, 64);
    let traj = simulate(&problem, &config(20.0), (0.0, 0.0)).unwrap();
    assert_eq!(traj.status, RunStatus::Completed);
    assert_eq!(traj.stop, StopReason::Horizon);
    assert_eq!(traj.t_last(), 20.0);
    assert!(front_increments_ok(&traj));
    let after = traj.times.partition_point(|&t| t < 1.0);
    assert!(traj.sup_u[after..].windows(2).all(|w| w[1] <= w[0]));
    assert!(traj.sup_v[after..].windows(2).all(|w| w[1] <= w[0]));
    assert!(traj.fronts.last().unwrap() < &2.0);
    assert!(matches!(certify_global(&traj), RunVerdict::GlobalCertified { .. }));
}

#[test]
fn large_amplitude_blows_up_early() {
    let problem = parabola(unit_spec(2.0, 2.0), 50.0, 64);
    let traj = simulate(&problem, &config(5.0), (0.0, 0.0)).unwrap();
    assert_eq!(traj.status, RunStatus::BlowupDetected);
    assert!(traj.t_last() < 1.0);
    assert!(front_increments_ok(&traj));
    let RunVerdict::BlowUp(evidence) = certify_global(&traj) else {
        panic!("expected blow-up");
    };
    assert!(evidence.t_cross < 1.0);
}

#[test]
fn linear_exponents_stay_global() {
    let problem = parabola(unit_spec(1.0, 1.0), 10.0, 64);
    let traj = simulate(&problem, &config(10.0), (0.0, 0.0)).unwrap();
    assert_eq!(traj.status, RunStatus::Completed);
    assert!(traj.max_sup() < traj.blowup_threshold);
    assert!(front_increments_ok(&traj));
    assert!(traj
        .times
        .iter()
        .zip(&traj.front_speeds)
        .filter(|(t, _)| **t > 0.01)
        .all(|(_, v)| *v > 0.0));
    assert!(matches!(certify_global(&traj), RunVerdict::GlobalHeuristic { pq, .. } if pq == 1.0));
}

#[test]
fn cascade_sup_is_non_increasing_in_n() {
    let (problem, config) = canonical::cascade(BoundaryStencil::SecondOrder);
    let result = match run_cascade(&problem, &config, &CASCADE_SCHEDULE, 1e-4) {
        Ok(r) => r,
        Err(frontsys_core::cascade::CascadeError::NoConvergence { result, .. }) => *result,
        Err(e) => panic!("{e}"),
    };
    assert_eq!(result.levels.len(), 4);
    assert!(result.ordering_holds());
    assert!(result.differences_non_increasing());
    for pair in result.levels.windows(2) {
        let (coarse, fine) = (&pair[0].trajectory, &pair[1].trajectory);
        assert_eq!(coarse.times, fine.times);
        for k in 0..coarse.len() {
            assert!(fine.sup_u[k] <= coarse.sup_u[k] + ORDERING_TOL * coarse.sup_u[k]);
            assert!(fine.fronts[k] <= coarse.fronts[k] * (1.0 + ORDERING_TOL));
        }
    }
}

#[test]
fn repeated_cascade_level_differs_by_zero() {
    let (problem, config) = canonical::cascade(BoundaryStencil::SecondOrder);
    let config = SolverConfig { t_end: 0.3, ..config };
    let a = simulate(&problem, &config, (0.5, 0.5)).unwrap();
    let b = simulate(&problem, &config, (0.5, 0.5)).unwrap();
    assert_eq!(check_ordering(&a, &b, ORDERING_TOL, Direction::AtMost).max_abs_diff, 0.0);
    assert!(run_cascade(&problem, &config, &[2, 2], 1e-4).is_err());
}

#[test]
fn lipschitz_cascade_delegates() {
    let problem = parabola(unit_spec(1.0, 1.0), 1.0, 32);
    let cfg = SolverConfig { n: 32, t_end: 0.2, ..SolverConfig::default() };
    let result = run_cascade(&problem, &cfg, &CASCADE_SCHEDULE, 1e-4).unwrap();
    assert!(result.delegated);
    assert_eq!(result.levels.len(), 1);
    assert!(result.warnings.iter().any(|w| w.contains("Lipschitz regime")));
    assert_eq!(result.limit(), &simulate(&problem, &cfg, (0.0, 0.0)).unwrap());
}

#[test]
fn shifted_run_dominates_unshifted() {
    let (problem, config) = canonical::shifted_pair(BoundaryStencil::SecondOrder);
    let plain = simulate(&problem, &config, (0.0, 0.0)).unwrap();
    let shifted = simulate(&problem, &config, canonical::SHIFTED_UPPER).unwrap();
    assert!(plain.warnings.iter().any(|w| w.contains("prefer cascade")));
    let report = check_ordering(&plain, &shifted, ORDERING_TOL, Direction::AtMost);
    assert!(report.holds(), "{report:?}");
    assert!(report.matched_times > 0);
}
