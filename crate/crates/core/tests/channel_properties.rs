mod common;

use aoi_core::channel::{
    convert_collision_budget, idle_probability, slot_transition_matrix, transition_matrix_power, BudgetDirection,
};
use aoi_core::closed_form::{lambert_w0, steady_state};
use aoi_core::{Policy, PuRates, SystemParams};
use proptest::prelude::*;

fn rates() -> impl Strategy<Value = PuRates> {
    (1e-3f64..2.0, 1e-3f64..2.0).prop_map(|(a, b)| PuRates::new(a, b).unwrap())
}

proptest! {
    #[test]
    fn chapman_kolmogorov(r in rates(), t1 in 0.0f64..50.0, t2 in 0.0f64..50.0) {
        let joint = transition_matrix_power(&r, t1 + t2);
        let split = transition_matrix_power(&r, t1).compose(&transition_matrix_power(&r, t2));
        prop_assert!((joint.p_ii - split.p_ii).abs() < 1e-12);
        prop_assert!((joint.p_ib - split.p_ib).abs() < 1e-12);
        prop_assert!((joint.p_bi - split.p_bi).abs() < 1e-12);
        prop_assert!((joint.p_bb - split.p_bb).abs() < 1e-12);
    }

    #[test]
    fn rows_are_stochastic(r in rates(), t in 0.0f64..1e4) {
        let m = transition_matrix_power(&r, t);
        prop_assert!((m.p_ii + m.p_ib - 1.0).abs() < 1e-12);
        prop_assert!((m.p_bi + m.p_bb - 1.0).abs() < 1e-12);
        for v in [m.p_ii, m.p_ib, m.p_bi, m.p_bb] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn stationary_row_is_invariant(r in rates(), t in 0.0f64..100.0) {
        let pi = idle_probability(&r);
        let (i, b) = transition_matrix_power(&r, t).apply((pi, 1.0 - pi));
        prop_assert!((i - pi).abs() < 1e-12);
        prop_assert!((b - (1.0 - pi)).abs() < 1e-12);
    }

    #[test]
    fn slot_matrix_matches_independent_formula(r in rates()) {
        let m = slot_transition_matrix(&r);
        let o = common::slot_probs(r.alpha(), r.beta());
        prop_assert!((m.p_ii - o[0][0]).abs() < 1e-12);
        prop_assert!((m.p_ib - o[0][1]).abs() < 1e-12);
        prop_assert!((m.p_bi - o[1][0]).abs() < 1e-12);
        prop_assert!((m.p_bb - o[1][1]).abs() < 1e-12);
    }

    #[test]
    fn budget_conversion_round_trip(r in rates(), eta in 1e-6f64..1e-3) {
        let p = convert_collision_budget(&r, eta, BudgetDirection::SiotToPu);
        if let Ok(p) = p {
            let back = convert_collision_budget(&r, p, BudgetDirection::PuToSiot).unwrap();
            prop_assert!((back - eta).abs() < 1e-12 * eta.max(1e-300) + 1e-18);
        }
    }

    #[test]
    fn lambert_identity(x in -0.36787944117144233f64..1e8) {
        let w = lambert_w0(x).unwrap();
        prop_assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn threshold_distribution_sums_to_one(
        a in 0.01f64..0.5, b in 0.05f64..1.0, phi in 0.0f64..0.5, gamma in 1u32..30
    ) {
        let p = SystemParams::new(PuRates::new(a, b).unwrap(), phi, 0.01).unwrap();
        let total: f64 = (1..=4000).map(|d| {
            let (i, bz) = steady_state(gamma, &p, d).unwrap();
            i + bz
        }).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "total {}", total);
    }

    #[test]
    fn policy_text_round_trip(gamma in 1u32..10_000, mu in 0.0f64..=1.0, p0 in 1e-6f64..=1.0) {
        for policy in [
            Policy::threshold(gamma).unwrap(),
            Policy::randomized(gamma, mu).unwrap(),
            Policy::bernoulli(p0).unwrap(),
        ] {
            let parsed: Policy = policy.to_string().parse().unwrap();
            prop_assert_eq!(parsed, policy);
        }
    }
}
