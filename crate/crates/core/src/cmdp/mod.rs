//! Constrained MDP over `(age, occupancy)` on a truncated age range.
//!
//! The collision constraint is relaxed with a Lagrange multiplier; each
//! relaxed problem is an average-reward MDP solved by relative value
//! iteration, and the multiplier is located by bisection. Ages saturate at
//! `delta_max`, which keeps the kernel stochastic.

mod bisection;
mod evaluate;
mod rvi;

pub use bisection::{lambda_bisection, BisectionOptions, ConstrainedSolution};
pub use evaluate::{policy_cost_evaluate, PolicyEvaluation, StationaryMetrics};
pub use rvi::{extract_threshold, rvi_solve, rvi_solve_from, RviOptions, SolvedPolicy};

use crate::channel::{slot_transition_matrix, Occupancy};
use crate::error::{invalid, Error, Result};
use crate::params::SystemParams;

/// Truncation bound used when none is given.
pub const DEFAULT_DELTA_MAX: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Wait,
    Transmit,
}

/// State of the decision process: age at the slot start and sensed occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AoiState {
    pub delta: u32,
    pub occupancy: Occupancy,
}

impl AoiState {
    pub fn new(delta: u32, occupancy: Occupancy) -> Result<Self> {
        if delta == 0 {
            return Err(invalid("delta", "age starts at 1"));
        }
        Ok(AoiState { delta, occupancy })
    }

    pub fn idle(delta: u32) -> Self {
        AoiState { delta, occupancy: Occupancy::Idle }
    }

    pub fn busy(delta: u32) -> Self {
        AoiState { delta, occupancy: Occupancy::Busy }
    }
}

/// Successor distribution of `state` under `action`.
pub fn transition_kernel(
    state: AoiState,
    action: Action,
    params: &SystemParams,
    delta_max: u32,
) -> Result<Vec<(AoiState, f64)>> {
    if state.delta == 0 || state.delta > delta_max {
        return Err(invalid("delta", format!("must lie in 1..={delta_max}, got {}", state.delta)));
    }
    let ch = slot_transition_matrix(&params.rates);
    let next = (state.delta + 1).min(delta_max);
    let out = match (action, state.occupancy) {
        (Action::Transmit, Occupancy::Busy) => return Err(Error::BusyTransmit { delta: state.delta }),
        (Action::Wait, occ) => vec![
            (AoiState::idle(next), ch.prob(occ, Occupancy::Idle)),
            (AoiState::busy(next), ch.prob(occ, Occupancy::Busy)),
        ],
        (Action::Transmit, Occupancy::Idle) => {
            let success = params.success_probability();
            vec![
                (AoiState::idle(1), success),
                (AoiState::busy(next), ch.p_ib),
                (AoiState::idle(next), ch.p_ii - success),
            ]
        }
    };
    Ok(out)
}

/// Per-slot reward: the current age, whatever the action.
pub fn reward(state: AoiState, _action: Action) -> f64 {
    f64::from(state.delta)
}

/// Expected number of collisions caused by `action` in `state`.
pub fn collision_cost(state: AoiState, action: Action, params: &SystemParams) -> f64 {
    match (action, state.occupancy) {
        (Action::Wait, _) => 0.0,
        (Action::Transmit, Occupancy::Busy) => 1.0,
        (Action::Transmit, Occupancy::Idle) => params.collision_on_transmit(),
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ActionEntry {
    pub action: Action,
    pub reward: f64,
    pub cost: f64,
    pub transitions: Vec<(usize, f64)>,
}

/// The decision process restricted to ages `1..=delta_max`.
#[derive(Debug, Clone)]
pub struct TruncatedModel {
    params: SystemParams,
    delta_max: u32,
    actions: Vec<Vec<ActionEntry>>,
}

impl TruncatedModel {
    pub fn new(params: SystemParams, delta_max: u32) -> Result<Self> {
        if delta_max < 2 {
            return Err(invalid("delta_max", format!("must be at least 2, got {delta_max}")));
        }
        let mut actions = Vec::with_capacity(2 * delta_max as usize);
        for delta in 1..=delta_max {
            for occupancy in [Occupancy::Idle, Occupancy::Busy] {
                let state = AoiState { delta, occupancy };
                let allowed: &[Action] = match occupancy {
                    Occupancy::Idle => &[Action::Wait, Action::Transmit],
                    Occupancy::Busy => &[Action::Wait],
                };
                let mut entries = Vec::with_capacity(allowed.len());
                for &action in allowed {
                    let transitions = transition_kernel(state, action, &params, delta_max)?
                        .into_iter()
                        .filter(|&(_, p)| p > 0.0)
                        .map(|(s, p)| (state_index(s), p))
                        .collect();
                    entries.push(ActionEntry {
                        action,
                        reward: reward(state, action),
                        cost: collision_cost(state, action, &params),
                        transitions,
                    });
                }
                actions.push(entries);
            }
        }
        Ok(TruncatedModel { params, delta_max, actions })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn delta_max(&self) -> u32 {
        self.delta_max
    }

    pub fn num_states(&self) -> usize {
        self.actions.len()
    }

    pub fn state(&self, index: usize) -> AoiState {
        let delta = (index / 2) as u32 + 1;
        let occupancy = if index.is_multiple_of(2) { Occupancy::Idle } else { Occupancy::Busy };
        AoiState { delta, occupancy }
    }

    pub fn index(&self, state: AoiState) -> usize {
        state_index(state)
    }

    /// Available actions at `state`.
    pub fn actions_at(&self, state: AoiState) -> Vec<Action> {
        self.actions[state_index(state)].iter().map(|e| e.action).collect()
    }

    /// Successor distribution stored for `(state, action)`.
    pub fn transitions(&self, state: AoiState, action: Action) -> Option<Vec<(AoiState, f64)>> {
        self.actions[state_index(state)]
            .iter()
            .find(|e| e.action == action)
            .map(|e| e.transitions.iter().map(|&(j, p)| (self.state(j), p)).collect())
    }

    pub(crate) fn entries(&self, index: usize) -> &[ActionEntry] {
        &self.actions[index]
    }
}

fn state_index(state: AoiState) -> usize {
    2 * (state.delta as usize - 1) + state.occupancy.index()
}
