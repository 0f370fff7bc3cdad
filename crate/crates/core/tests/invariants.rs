use frontsys_core::problem::{validate_spec, Family, InitialData, ProblemSpec};
use frontsys_core::verify::{check_ordering, compare_ordered_runs, Direction, RunInput, ORDERING_TOL};
use frontsys_core::{simulate, SolverConfig};
use proptest::prelude::*;

fn config() -> SolverConfig {
    SolverConfig {
        n: 32,
        t_end: 0.2,
        snapshot_times: vec![0.05, 0.1, 0.2],
        ..SolverConfig::default()
    }
}

fn close(a: &[f64], b: &[f64]) -> bool {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * scale)
}

prop_compose! {
    fn specs()(d1 in 0.2..2.0f64, d2 in 0.2..2.0f64, p in 0.5..3.0f64, q in 0.5..3.0f64,
               mu in 0.1..2.0f64, rho in 0.1..2.0f64, s0 in 0.5..2.0f64) -> ProblemSpec {
        ProblemSpec { d1, d2, p, q, mu, rho, s0 }
    }
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Cosine), Just(Family::Parabola)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn runs_are_monotone_nonnegative_and_deterministic(spec in specs(), fam in family(), amp in 0.01..2.0f64) {
        let problem = validate_spec(&spec, &InitialData::family(fam, amp), 32).unwrap();
        let a = simulate(&problem, &config(), (0.0, 0.0)).unwrap();
        prop_assert!(a.is_monotone());
        prop_assert!(a.front_speeds.iter().all(|&v| v >= 0.0));
        prop_assert!(a.snapshots.iter().all(|s| s.w.iter().chain(&s.z).all(|&v| v >= 0.0)));
        prop_assert!(a.snapshots.iter().all(|s| s.w[s.n()] == 0.0 && s.z[s.n()] == 0.0));
        prop_assert!(a.clamp_ratio() <= 1e-3);
        let b = simulate(&problem, &config(), (0.0, 0.0)).unwrap();
        prop_assert_eq!(&a, &b);
    }

    #[test]
    fn swapping_components_swaps_the_run(spec in specs(), amp in 0.01..2.0f64, ratio in 0.2..1.0f64) {
        let data = InitialData {
            u0: frontsys_core::Profile::family(Family::Parabola, amp),
            v0: frontsys_core::Profile::family(Family::Cosine, amp * ratio),
        };
        let problem = validate_spec(&spec, &data, 32).unwrap();
        let a = simulate(&problem, &config(), (0.0, 0.0)).unwrap();
        let b = simulate(&problem.swapped(), &config(), (0.0, 0.0)).unwrap();
        // mu rho and 1/rho are rounded, so agreement is to round-off only
        prop_assert_eq!(a.len(), b.len());
        prop_assert!(close(&a.times, &b.times));
        prop_assert!(close(&a.fronts, &b.fronts));
        prop_assert!(close(&a.sup_u, &b.sup_v));
        prop_assert!(close(&a.sup_v, &b.sup_u));
    }

    #[test]
    fn larger_data_stays_above(spec in specs(), amp in 0.01..1.0f64, factor in 1.0..3.0f64) {
        let lower = validate_spec(&spec, &InitialData::family(Family::Parabola, amp), 32).unwrap();
        let upper = validate_spec(&spec, &InitialData::family(Family::Parabola, amp * factor), 32).unwrap();
        let outcome = compare_ordered_runs(
            RunInput { problem: &lower, shifts: (0.0, 0.0) },
            RunInput { problem: &upper, shifts: (0.0, 0.0) },
            &config(),
            ORDERING_TOL,
        );
        prop_assert!(outcome.is_ok(), "{:?}", outcome.err());
        let outcome = outcome.unwrap();
        let reversed = check_ordering(&outcome.upper, &outcome.lower, ORDERING_TOL, Direction::AtLeast);
        prop_assert_eq!(reversed, outcome.report);
    }

    #[test]
    fn larger_shifts_stay_above(spec in specs(), amp in 0.01..1.0f64, a in 0.0..0.5f64, extra in 0.01..0.5f64) {
        let problem = validate_spec(&spec, &InitialData::family(Family::Cosine, amp), 32).unwrap();
        let outcome = compare_ordered_runs(
            RunInput { problem: &problem, shifts: (a, a) },
            RunInput { problem: &problem, shifts: (a + extra, a + extra) },
            &config(),
            ORDERING_TOL,
        );
        prop_assert!(outcome.is_ok(), "{:?}", outcome.err());
    }
}
