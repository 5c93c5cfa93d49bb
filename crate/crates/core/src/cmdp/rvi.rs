use super::{Action, AoiState, TruncatedModel};
use crate::channel::Occupancy;
use crate::error::{Error, Result};
use crate::policy::{Policy, TabularPolicy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RviOptions {
    /// Stop once the span of successive value differences falls below this.
    pub span_tol: f64,
    pub max_iter: usize,
}

impl Default for RviOptions {
    fn default() -> Self {
        RviOptions {
            span_tol: 1e-10,
            max_iter: 1_000_000,
        }
    }
}

/// Greedy policy of a converged relative value iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolvedPolicy {
    pub lambda: f64,
    /// Optimal average of `age + lambda * collisions`.
    pub gain: f64,
    /// Relative value per state index; zero at `(1, idle)`.
    pub bias: Vec<f64>,
    /// Transmit decision at `(delta, idle)` for `delta = 1..=delta_max`.
    pub transmit_idle: Vec<bool>,
    pub iterations: usize,
    pub span: f64,
}

impl SolvedPolicy {
    pub fn decision(&self, state: AoiState) -> Action {
        match state.occupancy {
            Occupancy::Busy => Action::Wait,
            Occupancy::Idle if self.transmit_idle[state.delta as usize - 1] => Action::Transmit,
            Occupancy::Idle => Action::Wait,
        }
    }

    pub fn to_policy(&self) -> Policy {
        Policy::Tabular(
            TabularPolicy::from_decisions(&self.transmit_idle).expect("decisions are probabilities"),
        )
    }
}

const REFERENCE: usize = 0;

/// Relative value iteration for the relaxed reward `age + lambda * collisions`.
pub fn rvi_solve(model: &TruncatedModel, lambda: f64, opts: &RviOptions) -> Result<SolvedPolicy> {
    rvi_solve_from(model, lambda, opts, None)
}

/// As [`rvi_solve`], starting from a previous bias vector.
pub fn rvi_solve_from(
    model: &TruncatedModel,
    lambda: f64,
    opts: &RviOptions,
    initial: Option<&[f64]>,
) -> Result<SolvedPolicy> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(crate::error::invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    if opts.span_tol.is_nan() || opts.span_tol <= 0.0 {
        return Err(crate::error::invalid("span_tol", "must be positive"));
    }
    let n = model.num_states();
    let mut h = match initial {
        Some(v) if v.len() == n => v.to_vec(),
        _ => vec![0.0; n],
    };
    let mut next = vec![0.0; n];
    let mut span = f64::INFINITY;

    for iter in 1..=opts.max_iter {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (s, slot) in next.iter_mut().enumerate() {
            let (value, _) = best_action(model, s, lambda, &h);
            *slot = value;
            let d = value - h[s];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        span = hi - lo;
        let gain = next[REFERENCE];
        for (hv, nv) in h.iter_mut().zip(&next) {
            *hv = nv - gain;
        }
        if span < opts.span_tol {
            let transmit_idle = (0..model.delta_max())
                .map(|d| best_action(model, 2 * d as usize, lambda, &h).1 == Action::Transmit)
                .collect();
            return Ok(SolvedPolicy {
                lambda,
                gain,
                bias: h,
                transmit_idle,
                iterations: iter,
                span,
            });
        }
    }
    Err(Error::RviNonConvergence {
        iterations: opts.max_iter,
        span,
    })
}

// Bellman backup at state `s`; transmitting must be strictly better to win.
fn best_action(model: &TruncatedModel, s: usize, lambda: f64, h: &[f64]) -> (f64, Action) {
    let mut best = (f64::INFINITY, Action::Wait);
    for e in model.entries(s) {
        let q = e.reward + lambda * e.cost + e.transitions.iter().map(|&(j, p)| p * h[j]).sum::<f64>();
        let better = match e.action {
            Action::Wait => q <= best.0,
            Action::Transmit => q < best.0,
        };
        if better {
            best = (q, e.action);
        }
    }
    best
}

/// Threshold of a policy that transmits at every idle age from some point on.
pub fn extract_threshold(policy: &SolvedPolicy) -> Result<u32> {
    let first = policy
        .transmit_idle
        .iter()
        .position(|&t| t)
        .ok_or(Error::NeverTransmits)?;
    let offending: Vec<u32> = policy.transmit_idle[first..]
        .iter()
        .enumerate()
        .filter(|(_, &t)| !t)
        .map(|(k, _)| (first + k + 1) as u32)
        .collect();
    if offending.is_empty() {
        Ok(first as u32 + 1)
    } else {
        Err(Error::NotThreshold { offending })
    }
}
