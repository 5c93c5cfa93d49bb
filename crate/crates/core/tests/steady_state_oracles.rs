mod common;

use aoi_core::baseline::{average_aoi_bernoulli, average_aoi_bernoulli_series, bernoulli_steady_state};
use aoi_core::closed_form::{
    average_aoi_closed_form, average_aoi_series, collision_probability, lambert_w0, mixed_policy_metrics,
    mixed_policy_steady_state, steady_state, theta_1_0,
};
use aoi_core::{PuRates, SystemParams};
use common::power_iteration_steady_state;

const TRUNCATION: usize = 300;

fn instances() -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for alpha in [0.05, 0.1, 0.2] {
        for beta in [0.3, 0.9] {
            for phi in [0.1, 0.3] {
                out.push((alpha, beta, phi));
            }
        }
    }
    out
}

fn params(alpha: f64, beta: f64, phi: f64) -> SystemParams {
    SystemParams::new(PuRates::new(alpha, beta).unwrap(), phi, 0.01).unwrap()
}

fn assert_states(name: &str, reference: &[f64], closed: impl Fn(u32) -> (f64, f64)) {
    for delta in 1..=(TRUNCATION / 2) as u32 {
        let (i, b) = closed(delta);
        let k = 2 * (delta as usize - 1);
        assert!((i - reference[k]).abs() < 1e-8, "{name}: idle age {delta}: {i} vs {}", reference[k]);
        assert!((b - reference[k + 1]).abs() < 1e-8, "{name}: busy age {delta}: {b} vs {}", reference[k + 1]);
    }
}

#[test]
fn threshold_steady_state_matches_power_iteration() {
    let mut count = 0;
    for (alpha, beta, phi) in instances() {
        for gamma in [3u32, 12] {
            let p = params(alpha, beta, phi);
            let pi = power_iteration_steady_state(alpha, beta, phi, |d| f64::from(u8::from(d >= gamma as usize)), TRUNCATION);
            assert_states(&format!("threshold {gamma} {alpha} {beta} {phi}"), &pi, |d| {
                steady_state(gamma, &p, d).unwrap()
            });
            assert!((theta_1_0(gamma, &p) - pi[0]).abs() < 1e-8);
            count += 1;
        }
    }
    assert!(count >= 20);
}

#[test]
fn mixed_steady_state_matches_power_iteration() {
    let mut count = 0;
    for (alpha, beta, phi) in instances() {
        for (gamma1, mu) in [(4u32, 0.37), (10, 0.81)] {
            let p = params(alpha, beta, phi);
            let g = gamma1 as usize;
            let rule = |d: usize| {
                if d > g {
                    1.0
                } else if d == g {
                    mu
                } else {
                    0.0
                }
            };
            let pi = power_iteration_steady_state(alpha, beta, phi, rule, TRUNCATION);
            assert_states(&format!("mixed {gamma1},{mu} {alpha} {beta} {phi}"), &pi, |d| {
                mixed_policy_steady_state(&p, gamma1, mu, d).unwrap()
            });
            // collision rate from the reference distribution
            let leave = 1.0 - (-alpha).exp();
            let psi: f64 = (1..=TRUNCATION).map(|d| pi[2 * (d - 1)] * rule(d) * leave).sum();
            let metrics = mixed_policy_metrics(&p, gamma1, mu).unwrap();
            assert!((metrics.psi_s - psi).abs() < 1e-10);
            count += 1;
        }
    }
    assert!(count >= 20);
}

#[test]
fn bernoulli_steady_state_matches_power_iteration() {
    let mut count = 0;
    for (alpha, beta, phi) in instances() {
        for p0 in [0.2, 0.9] {
            let p = params(alpha, beta, phi);
            let pi = power_iteration_steady_state(alpha, beta, phi, |_| p0, TRUNCATION);
            assert_states(&format!("bernoulli {p0} {alpha} {beta} {phi}"), &pi, |d| {
                bernoulli_steady_state(&p, p0, d).unwrap()
            });
            let mean: f64 = (1..=TRUNCATION).map(|d| d as f64 * (pi[2 * (d - 1)] + pi[2 * d - 1])).sum();
            let cf = average_aoi_bernoulli(&p, p0).unwrap();
            assert!(((cf - mean) / mean).abs() < 1e-8, "{cf} vs {mean}");
            count += 1;
        }
    }
    assert!(count >= 20);
}

#[test]
fn closed_form_average_matches_series() {
    let grid = [
        (0.02, 0.4, 0.2),
        (0.02, 0.4, 0.3),
        (0.01, 0.03, 0.2),
        (0.05, 0.15, 0.1),
        (0.1, 0.3, 0.3),
        (0.2, 0.9, 0.0),
        (0.001, 0.003, 0.2),
    ];
    for (alpha, beta, phi) in grid {
        let p = params(alpha, beta, phi);
        for gamma in (1..=150).step_by(7) {
            let cf = average_aoi_closed_form(gamma, &p).unwrap();
            let series = average_aoi_series(gamma, &p).unwrap();
            assert!(((cf - series) / series).abs() < 1e-6, "{alpha} {beta} {phi} {gamma}: {cf} vs {series}");
        }
    }
}

#[test]
fn series_mean_matches_power_iteration() {
    for (alpha, beta, phi) in instances() {
        let p = params(alpha, beta, phi);
        let gamma = 6;
        let pi = power_iteration_steady_state(alpha, beta, phi, |d| f64::from(u8::from(d >= gamma)), TRUNCATION);
        let mean: f64 = (1..=TRUNCATION).map(|d| d as f64 * (pi[2 * (d - 1)] + pi[2 * d - 1])).sum();
        let series = average_aoi_series(gamma as u32, &p).unwrap();
        assert!(((series - mean) / mean).abs() < 1e-8);
        let bern = average_aoi_bernoulli_series(&p, 0.5).unwrap();
        assert!(bern.is_finite() && bern > 1.0);
        let psi: f64 = (gamma..=TRUNCATION)
            .map(|d| pi[2 * (d - 1)] * (1.0 - (-alpha).exp()))
            .sum();
        assert!((collision_probability(gamma as u32, &p) - psi).abs() < 1e-10);
    }
}

#[test]
fn lambert_inverse_identity() {
    let mut x = -1.0 / std::f64::consts::E;
    while x < 1e6 {
        let w = lambert_w0(x).unwrap();
        let back = w * w.exp();
        assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0), "x={x}: {back}");
        x = if x < 0.0 { x + 0.01 } else { x * 1.5 + 1e-3 };
    }
}
