use nalgebra::{DMatrix, DVector};

use super::{Action, TruncatedModel};
use crate::error::{Error, Result};
use crate::policy::Policy;

/// Long-run averages of a stationary policy on the truncated model.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryMetrics {
    pub avg_aoi: f64,
    pub avg_cost: f64,
    /// Stationary probability per state index.
    pub distribution: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyEvaluation {
    Stationary(StationaryMetrics),
    /// The policy never transmits, so the age only grows and no collision
    /// is ever caused.
    DivergentAge { avg_cost: f64 },
}

impl PolicyEvaluation {
    pub fn avg_cost(&self) -> f64 {
        match self {
            PolicyEvaluation::Stationary(m) => m.avg_cost,
            PolicyEvaluation::DivergentAge { avg_cost } => *avg_cost,
        }
    }

    pub fn avg_aoi(&self) -> f64 {
        match self {
            PolicyEvaluation::Stationary(m) => m.avg_aoi,
            PolicyEvaluation::DivergentAge { .. } => f64::INFINITY,
        }
    }
}

/// Solves the stationary equations of `policy` on `model` exactly.
pub fn policy_cost_evaluate(policy: &Policy, model: &TruncatedModel) -> Result<PolicyEvaluation> {
    let n = model.num_states();
    let transmit: Vec<f64> = (1..=model.delta_max())
        .map(|d| policy.transmit_probability(u64::from(d)))
        .collect();
    if transmit.iter().all(|&p| p == 0.0) {
        return Ok(PolicyEvaluation::DivergentAge { avg_cost: 0.0 });
    }

    // Rows of (P^T - I), with the last balance equation replaced by normalisation.
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut reward = vec![0.0; n];
    let mut cost = vec![0.0; n];
    for i in 0..n {
        let weights = action_weights(model.state(i).delta, i, &transmit);
        for e in model.entries(i) {
            let w = match e.action {
                Action::Wait => weights.0,
                Action::Transmit => weights.1,
            };
            if w == 0.0 {
                continue;
            }
            reward[i] += w * e.reward;
            cost[i] += w * e.cost;
            for &(j, p) in &e.transitions {
                a[(j, i)] += w * p;
            }
        }
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateChain("stationary system is singular".into()))?;

    let mut distribution: Vec<f64> = x.iter().copied().collect();
    for p in &mut distribution {
        if *p < 0.0 {
            if *p < -1e-12 {
                return Err(Error::DegenerateChain(format!("negative stationary mass {p}")));
            }
            *p = 0.0;
        }
    }
    let avg_aoi = distribution.iter().zip(&reward).map(|(p, r)| p * r).sum();
    let avg_cost = distribution.iter().zip(&cost).map(|(p, c)| p * c).sum();
    Ok(PolicyEvaluation::Stationary(StationaryMetrics {
        avg_aoi,
        avg_cost,
        distribution,
    }))
}

// (wait, transmit) weights at state index `i`; busy states only wait.
fn action_weights(delta: u32, i: usize, transmit: &[f64]) -> (f64, f64) {
    if i % 2 == 1 {
        (1.0, 0.0)
    } else {
        let p = transmit[delta as usize - 1];
        (1.0 - p, p)
    }
}
