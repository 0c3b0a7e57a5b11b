use proptest::prelude::*;

use sta_expansion::ermakov::ermakov_residual;
use sta_expansion::fidelity::{avg_perturbation_energy, fidelity_bound, fidelity_second_order};
use sta_expansion::protocol::{bangbang_times, bsb_interval_times, design, solve_c1, Family, Protocol};
use sta_expansion::validation::{boundary_defect, first_integral_spread};

fn feasible() -> impl Strategy<Value = (f64, f64)> {
    (1.5f64..20.0, 0.5f64..2.0).prop_filter("delta gamma^4 > 1", |(g, d)| d * g.powi(4) > 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_family_solves_the_ermakov_equation((gamma, delta) in feasible(), stretch in 1.01f64..20.0) {
        let tau = stretch * bangbang_times(gamma, delta).unwrap().total();
        for family in Family::ALL {
            let (p, traj) = design(family, Some(tau), gamma, delta).unwrap();
            prop_assert!(ermakov_residual(&traj, &p) < 1e-9, "{family}");
            prop_assert!(boundary_defect(&traj, gamma) < 1e-9, "{family}");
            prop_assert!(first_integral_spread(&p, &traj) < 1e-9, "{family}");
            prop_assert!(p.check_tiling().is_ok());
        }
    }

    #[test]
    fn duration_round_trips_through_c1((gamma, delta) in feasible(), stretch in 1.0001f64..100.0) {
        let tau = stretch * bangbang_times(gamma, delta).unwrap().total();
        let c1 = solve_c1(tau, gamma, delta).unwrap();
        let back = bsb_interval_times(c1, gamma, delta).unwrap().total();
        prop_assert!((back - tau).abs() < 1e-9 * tau);
    }

    #[test]
    fn fidelity_estimates_stay_in_range(
        (gamma, delta) in feasible(),
        stretch in 1.01f64..10.0,
        w in 30.0f64..500.0,
        n in 0usize..4,
    ) {
        let tau = stretch * bangbang_times(gamma, delta).unwrap().total();
        for family in Family::ALL {
            let (p, traj) = design(family, Some(tau), gamma, delta).unwrap();
            let f_b = fidelity_bound(&traj, w, n, p.tau_f);
            prop_assert!(f_b <= 1.0);
            let v1 = avg_perturbation_energy(&traj, &p, w, n, p.tau_f);
            prop_assert!((f_b - (1.0 - v1 * p.tau_f)).abs() < 1e-9 * (1.0 + f_b.abs()));
            let second = fidelity_second_order(&traj, &p, n, w, p.tau_f).unwrap();
            prop_assert!((0.0..=1.0).contains(&second.value));
        }
    }

    #[test]
    fn bang_bang_times_satisfy_the_switching_identity((gamma, delta) in feasible()) {
        let t = bangbang_times(gamma, delta).unwrap();
        let s = delta.sqrt();
        let lhs = (2.0 * s * t.tau1).cosh();
        let want = (delta * gamma.powi(4) + 1.0) / (gamma * gamma * (delta + 1.0));
        prop_assert!((lhs - want).abs() < 1e-9 * want);
        prop_assert!(t.tau1 > 0.0 && t.tau2 > 0.0);
    }

    #[test]
    fn protocols_survive_json((gamma, delta) in feasible(), stretch in 1.01f64..5.0) {
        let tau = stretch * bangbang_times(gamma, delta).unwrap().total();
        for family in Family::ALL {
            let (p, _) = design(family, Some(tau), gamma, delta).unwrap();
            prop_assert_eq!(Protocol::from_json(&p.to_json()).unwrap(), p);
        }
    }
}
