//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

/// One-slot channel probabilities written out from the two-state CTMC.
pub fn slot_probs(alpha: f64, beta: f64) -> [[f64; 2]; 2] {
    let s = alpha + beta;
    let e = (-s).exp();
    [
        [(beta + alpha * e) / s, alpha * (1.0 - e) / s],
        [beta * (1.0 - e) / s, (alpha + beta * e) / s],
    ]
}

/// Stationary distribution of the age chain with ages clamped at `n`,
/// computed by iterating the lazy chain `(P + I) / 2` from a uniform start.
///
/// Index `2 * (delta - 1) + u`, with `u = 0` idle and `u = 1` busy.
pub fn power_iteration_steady_state(
    alpha: f64,
    beta: f64,
    phi: f64,
    transmit: impl Fn(usize) -> f64,
    n: usize,
) -> Vec<f64> {
    let p = slot_probs(alpha, beta);
    let success = (1.0 - phi) * (-alpha).exp();
    let states = 2 * n;
    let mut pi = vec![1.0 / states as f64; states];
    let mut next = vec![0.0; states];
    for _ in 0..2_000_000 {
        next.iter_mut().for_each(|x| *x = 0.0);
        for delta in 1..=n {
            // the next age is min(delta + 1, n), at zero-based position min(delta, n - 1)
            let up = delta.min(n - 1);
            let (i, b) = (2 * (delta - 1), 2 * (delta - 1) + 1);
            let to_i = 2 * up;
            let to_b = 2 * up + 1;
            // busy: wait
            next[to_i] += pi[b] * p[1][0];
            next[to_b] += pi[b] * p[1][1];
            // idle: wait with 1 - q, transmit with q
            let q = transmit(delta);
            next[to_i] += pi[i] * (1.0 - q) * p[0][0];
            next[to_b] += pi[i] * (1.0 - q) * p[0][1];
            next[0] += pi[i] * q * success;
            next[to_b] += pi[i] * q * p[0][1];
            next[to_i] += pi[i] * q * (p[0][0] - success);
        }
        let mut change = 0.0;
        for k in 0..states {
            let lazy = 0.5 * (pi[k] + next[k]);
            change += (lazy - pi[k]).abs();
            pi[k] = lazy;
        }
        if change < 1e-14 {
            return pi;
        }
    }
    panic!("power iteration did not settle");
}
