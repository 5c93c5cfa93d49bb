use super::{extract_threshold, policy_cost_evaluate, rvi_solve_from, RviOptions, SolvedPolicy, TruncatedModel};
use crate::error::{invalid, Error, Result};
use crate::policy::{Policy, TabularPolicy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionOptions {
    /// Relative width of the multiplier bracket at which the search gives up.
    pub lambda_tol: f64,
    /// Cap on the number of relaxed problems solved.
    pub max_solves: usize,
    pub rvi: RviOptions,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        BisectionOptions {
            lambda_tol: 1e-12,
            max_solves: 400,
            rvi: RviOptions::default(),
        }
    }
}

/// Optimal policy of the constrained problem, as a mixture of two
/// deterministic threshold policies bracketing the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedSolution {
    pub lambda_low: f64,
    pub lambda_high: f64,
    /// Policy at `lambda_low`; its collision rate exceeds the budget unless
    /// the budget is slack.
    pub policy_low: SolvedPolicy,
    pub policy_high: SolvedPolicy,
    pub thresholds: (u32, u32),
    /// Transmit probability at `(thresholds.0, idle)`.
    pub mu: f64,
    pub achieved_cost: f64,
    pub achieved_aoi: f64,
}

impl ConstrainedSolution {
    /// The mixed policy as a [`Policy`].
    pub fn policy(&self) -> Policy {
        let (g1, g2) = self.thresholds;
        if g1 == g2 {
            Policy::Threshold { gamma: g1 }
        } else {
            Policy::Randomized { gamma1: g1, mu: self.mu }
        }
    }
}

struct Probe {
    lambda: f64,
    solved: SolvedPolicy,
    gamma: u32,
    cost: f64,
    aoi: f64,
}

fn probe(model: &TruncatedModel, lambda: f64, rvi: &RviOptions, warm: Option<&[f64]>) -> Result<Probe> {
    let solved = rvi_solve_from(model, lambda, rvi, warm)?;
    let gamma = extract_threshold(&solved)?;
    let eval = policy_cost_evaluate(&solved.to_policy(), model)?;
    Ok(Probe {
        lambda,
        gamma,
        cost: eval.avg_cost(),
        aoi: eval.avg_aoi(),
        solved,
    })
}

/// Binding tolerance on the achieved collision rate.
const BINDING_TOL: f64 = 1e-9;

/// Searches the Lagrange multiplier for which the greedy threshold moves
/// across the budget, then mixes the two bracketing policies at the lower
/// threshold so that the collision rate equals `eta_s`.
pub fn lambda_bisection(model: &TruncatedModel, eta_s: f64, opts: &BisectionOptions) -> Result<ConstrainedSolution> {
    if !(eta_s > 0.0 && eta_s < 1.0) {
        return Err(invalid("eta_s", format!("must lie in (0, 1), got {eta_s}")));
    }
    let mut solves = 0usize;
    let budget = |solves: &mut usize| -> Result<()> {
        *solves += 1;
        if *solves > opts.max_solves {
            Err(Error::BisectionFailure(format!("exceeded {} relaxed solves", opts.max_solves)))
        } else {
            Ok(())
        }
    };

    budget(&mut solves)?;
    let zero = probe(model, 0.0, &opts.rvi, None)?;
    if zero.cost <= eta_s {
        log::debug!("budget is slack at lambda = 0 (threshold {})", zero.gamma);
        return Ok(ConstrainedSolution {
            lambda_low: 0.0,
            lambda_high: 0.0,
            thresholds: (zero.gamma, zero.gamma),
            mu: 1.0,
            achieved_cost: zero.cost,
            achieved_aoi: zero.aoi,
            policy_high: zero.solved.clone(),
            policy_low: zero.solved,
        });
    }

    let mut low = zero;
    let mut lambda = 1.0;
    let mut high = loop {
        budget(&mut solves)?;
        let p = probe(model, lambda, &opts.rvi, Some(&low.solved.bias))?;
        if p.cost <= eta_s {
            break p;
        }
        check_truncation(model, p.gamma)?;
        low = p;
        lambda *= 2.0;
    };

    while high.gamma > low.gamma + 1 {
        if high.lambda - low.lambda <= opts.lambda_tol * high.lambda.max(1.0) {
            return Err(Error::BisectionFailure(format!(
                "multiplier bracket [{}, {}] collapsed with thresholds {} and {}",
                low.lambda, high.lambda, low.gamma, high.gamma
            )));
        }
        budget(&mut solves)?;
        let mid = 0.5 * (low.lambda + high.lambda);
        let p = probe(model, mid, &opts.rvi, Some(&high.solved.bias))?;
        if p.cost > eta_s {
            low = p;
        } else {
            high = p;
        }
    }
    check_truncation(model, high.gamma)?;
    if high.gamma == low.gamma {
        return Err(Error::BisectionFailure(format!(
            "bracketing policies share threshold {} yet straddle the budget",
            low.gamma
        )));
    }

    // Every delivery cycle carries the same expected number of collisions and
    // the boundary age is visited at most once per cycle, so the mean cycle
    // length, and with it 1 / cost, is affine in the boundary weight.
    let mu = if high.cost >= eta_s {
        0.0
    } else {
        let inv = |d: f64| 1.0 / d;
        ((inv(eta_s) - inv(high.cost)) / (inv(low.cost) - inv(high.cost))).clamp(0.0, 1.0)
    };
    let mixed = mix(&low.solved, &high.solved, mu)?;
    let eval = policy_cost_evaluate(&mixed, model)?;
    let achieved_cost = eval.avg_cost();
    if (achieved_cost - eta_s).abs() > BINDING_TOL {
        return Err(Error::BisectionFailure(format!(
            "mixed policy cost {achieved_cost} misses budget {eta_s}"
        )));
    }
    log::debug!(
        "thresholds ({}, {}) mu = {mu} after {solves} relaxed solves",
        low.gamma,
        high.gamma
    );
    Ok(ConstrainedSolution {
        lambda_low: low.lambda,
        lambda_high: high.lambda,
        thresholds: (low.gamma, high.gamma),
        mu,
        achieved_cost,
        achieved_aoi: eval.avg_aoi(),
        policy_low: low.solved,
        policy_high: high.solved,
    })
}

fn check_truncation(model: &TruncatedModel, gamma: u32) -> Result<()> {
    if gamma > model.delta_max() / 2 {
        Err(Error::TruncationTooSmall {
            gamma,
            delta_max: model.delta_max(),
        })
    } else {
        Ok(())
    }
}

// Follow `low` with probability `mu` wherever the two decisions differ.
fn mix(low: &SolvedPolicy, high: &SolvedPolicy, mu: f64) -> Result<Policy> {
    let probs = low
        .transmit_idle
        .iter()
        .zip(&high.transmit_idle)
        .map(|(&l, &h)| mu * f64::from(u8::from(l)) + (1.0 - mu) * f64::from(u8::from(h)))
        .collect();
    Ok(Policy::Tabular(TabularPolicy::new(probs)?))
}
