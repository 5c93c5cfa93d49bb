mod common;

use aoi_core::channel::idle_probability;
use aoi_core::closed_form::{average_aoi_series, collision_probability, OptimalPolicy};
use aoi_core::sim::{replicate, simulate, Horizon, SimConfig};
use aoi_core::{Policy, PuRates, SystemParams};

fn params() -> SystemParams {
    SystemParams::new(PuRates::new(0.02, 0.4).unwrap(), 0.2, 0.001).unwrap()
}

#[test]
fn sensed_channel_statistics() {
    let p = SystemParams::new(PuRates::new(0.1, 0.3).unwrap(), 0.2, 0.001).unwrap();
    let cfg = SimConfig::new(p, Policy::threshold(3).unwrap(), Horizon::Slots(1_000_000), 21);
    let r = simulate(&cfg).unwrap();
    let p_idle = idle_probability(&p.rates);
    assert!((r.idle_fraction - p_idle).abs() < 3.0 * r.idle_fraction_se, "{} vs {p_idle}", r.idle_fraction);

    let expected = common::slot_probs(0.1, 0.3);
    for (from, (counts, probs)) in r.channel_transitions.iter().zip(expected).enumerate() {
        let n: u64 = counts.iter().sum();
        for (to, (&count, q)) in counts.iter().zip(probs).enumerate() {
            let hat = count as f64 / n as f64;
            let se = (q * (1.0 - q) / n as f64).sqrt();
            assert!((hat - q).abs() < 3.0 * se, "{from}->{to}: {hat} vs {q}");
        }
    }
    assert_eq!(r.cycle_collision_violations, 0);
}

#[test]
fn threshold_twenty_matches_analysis() {
    let cfg = SimConfig::new(params(), Policy::threshold(20).unwrap(), Horizon::Slots(1_000_000), 42);
    let r = simulate(&cfg).unwrap();
    let analytic = average_aoi_series(20, &params()).unwrap();
    assert!(((r.avg_aoi - analytic) / analytic).abs() < 0.02, "{} vs {analytic}", r.avg_aoi);
    let psi = collision_probability(20, &params());
    assert!((r.psi_s_hat - psi).abs() < 3.0 * r.psi_s_se, "{} vs {psi}", r.psi_s_hat);
    assert!(!r.aoi_divergence_flag);
}

#[test]
fn optimal_policy_meets_budget() {
    let p = params();
    let opt = OptimalPolicy::solve(&p).unwrap();
    let cfg = SimConfig::new(p, opt.policy(), Horizon::Slots(1_000_000), 7);
    let r = simulate(&cfg).unwrap();
    assert!((r.psi_s_hat - 0.001).abs() < 3.0 * r.psi_s_se, "{} +- {}", r.psi_s_hat, r.psi_s_se);
}

#[test]
fn replication_error_shrinks() {
    let cfg = SimConfig::new(params(), Policy::threshold(10).unwrap(), Horizon::Slots(20_000), 99);
    let se: Vec<f64> = [4, 16, 64].iter().map(|&n| replicate(&cfg, n).unwrap().avg_aoi.se).collect();
    // a fourfold increase in replications should roughly halve the error
    for w in se.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.3..3.0).contains(&ratio), "ratio {ratio} from {se:?}");
    }
}
