//! Slot-level Monte Carlo replay of a policy over a sampled primary-user path.
//!
//! Each slot starts with an exact sensing of the channel. A transmission
//! collides when the primary user returns at any instant inside the slot;
//! otherwise it is delivered unless an independent outage draw falls below
//! `phi_s`. The age is sampled at slot starts.

mod replicate;
mod trajectory;

pub use replicate::{replicate, replicate_serial, replication_seed, MetricSummary, ReplicatedResult};
pub use trajectory::{generate_pu_trajectory, generate_pu_trajectory_for_slots, PuTrajectory};

use rand::Rng;

use crate::channel::Occupancy;
use crate::error::{invalid, Result};
use crate::params::SystemParams;
use crate::policy::Policy;
use trajectory::{stream_rng, DECISION_STREAM};

/// Length of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Slots(u64),
    /// Busy-idle cycles of the primary user; the run covers every whole slot
    /// of the sampled path.
    Cycles(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: SystemParams,
    pub policy: Policy,
    pub horizon: Horizon,
    pub seed: u64,
    pub initial_occupancy: Occupancy,
}

impl SimConfig {
    pub fn new(params: SystemParams, policy: Policy, horizon: Horizon, seed: u64) -> Self {
        SimConfig {
            params,
            policy,
            horizon,
            seed,
            initial_occupancy: Occupancy::Idle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Stop after this many slots even if the path is longer.
    pub max_slots: Option<u64>,
    /// Age above which the run is flagged as divergent.
    pub age_ceiling: u64,
    /// Number of equal-length batches behind the standard errors.
    pub batches: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_slots: None,
            age_ceiling: 10_000_000,
            batches: 50,
        }
    }
}

/// Empirical metrics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Mean slot-start age.
    pub avg_aoi: f64,
    /// Collisions per slot.
    pub psi_s_hat: f64,
    /// Collisions per busy-idle cycle.
    pub psi_p_hat: f64,
    pub success_count: u64,
    pub transmit_count: u64,
    pub collision_count: u64,
    pub slots: u64,
    /// Primary-user arrivals strictly inside the simulated window.
    pub cycles: u64,
    /// Set when the age passes the ceiling or no update is ever delivered.
    pub aoi_divergence_flag: bool,
    /// Batch-means standard error of `avg_aoi`.
    pub avg_aoi_se: f64,
    /// Batch-means standard error of `psi_s_hat`.
    pub psi_s_se: f64,
    /// Fraction of slots sensed idle.
    pub idle_fraction: f64,
    pub idle_fraction_se: f64,
    /// Counts of sensed occupancy at consecutive slot starts,
    /// indexed `[from][to]` by [`Occupancy::index`].
    pub channel_transitions: [[u64; 2]; 2],
    /// Busy-idle cycles in which more than one collision was recorded.
    pub cycle_collision_violations: u64,
    pub max_age: u64,
}

impl SimResult {
    /// Delivered updates per slot.
    pub fn throughput(&self) -> f64 {
        self.success_count as f64 / self.slots as f64
    }
}

/// Runs `config` on a freshly sampled path.
pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    simulate_with(config, &RunOptions::default())
}

pub fn simulate_with(config: &SimConfig, options: &RunOptions) -> Result<SimResult> {
    let rates = &config.params.rates;
    let (trajectory, max_slots) = match config.horizon {
        Horizon::Slots(n) => (
            generate_pu_trajectory_for_slots(rates, n, config.seed, config.initial_occupancy)?,
            Some(n),
        ),
        Horizon::Cycles(n) => (
            generate_pu_trajectory(rates, n, config.seed, config.initial_occupancy)?,
            None,
        ),
    };
    let options = RunOptions {
        max_slots: max_slots.or(options.max_slots),
        ..*options
    };
    run_policy_with(&trajectory, &config.params, &config.policy, config.seed, &options)
}

/// Replays `policy` slot by slot over `trajectory`.
pub fn run_policy(trajectory: &PuTrajectory, params: &SystemParams, policy: &Policy, seed: u64) -> Result<SimResult> {
    run_policy_with(trajectory, params, policy, seed, &RunOptions::default())
}

#[derive(Default, Clone, Copy)]
struct Batch {
    slots: u64,
    age: u128,
    collisions: u64,
    idle: u64,
}

pub fn run_policy_with(
    trajectory: &PuTrajectory,
    params: &SystemParams,
    policy: &Policy,
    seed: u64,
    options: &RunOptions,
) -> Result<SimResult> {
    let whole = trajectory.whole_slots();
    let slots = options.max_slots.map_or(whole, |m| m.min(whole));
    if slots == 0 {
        return Err(invalid("trajectory", "covers no whole slot"));
    }
    if options.batches == 0 {
        return Err(invalid("batches", "must be at least 1"));
    }
    let n_batches = options.batches.min(slots as usize).max(1);
    let mut batches = vec![Batch::default(); n_batches];
    let mut rng = stream_rng(seed, DECISION_STREAM);
    let phi = params.phi_s();

    let durations = &trajectory.durations;
    let mut segment = 0usize;
    let mut segment_end = durations[0];
    let mut occ = trajectory.initial;
    let mut arrivals = 0u64;
    let mut last_collision_cycle = None;
    let mut violations = 0u64;

    let mut age: u64 = 1;
    let mut max_age = 1;
    let mut age_sum: u128 = 0;
    let (mut successes, mut transmits, mut collisions) = (0u64, 0u64, 0u64);
    let mut transitions = [[0u64; 2]; 2];
    let mut prev: Option<Occupancy> = None;

    for n in 0..slots {
        let start = n as f64;
        while segment_end <= start {
            segment += 1;
            if occ == Occupancy::Idle {
                arrivals += 1;
            }
            occ = occ.flip();
            segment_end += durations[segment];
        }
        let batch = &mut batches[(n as u128 * n_batches as u128 / slots as u128) as usize];
        batch.slots += 1;
        batch.age += u128::from(age);
        age_sum += u128::from(age);
        if let Some(p) = prev {
            transitions[p.index()][occ.index()] += 1;
        }
        prev = Some(occ);

        let mut delivered = false;
        if occ == Occupancy::Idle {
            batch.idle += 1;
            let p = policy.transmit_probability(age);
            let transmit = p >= 1.0 || (p > 0.0 && rng.random::<f64>() < p);
            if transmit {
                transmits += 1;
                if segment_end < start + 1.0 {
                    collisions += 1;
                    batch.collisions += 1;
                    // The arrival inside this slot opens cycle `arrivals + 1`.
                    let cycle = arrivals + 1;
                    if last_collision_cycle == Some(cycle) {
                        violations += 1;
                    }
                    last_collision_cycle = Some(cycle);
                } else if rng.random::<f64>() >= phi {
                    delivered = true;
                }
            }
        }
        if delivered {
            successes += 1;
            age = 1;
        } else {
            age += 1;
            max_age = max_age.max(age);
        }
    }

    // Arrivals in the rest of the window (0, slots).
    let horizon = slots as f64;
    let mut boundary = segment_end;
    let mut k = segment;
    while boundary < horizon {
        if trajectory.occupancy(k) == Occupancy::Idle {
            arrivals += 1;
        }
        k += 1;
        boundary += durations[k];
    }

    let avg_aoi = age_sum as f64 / slots as f64;
    let psi_s_hat = collisions as f64 / slots as f64;
    let idle_total: u64 = batches.iter().map(|b| b.idle).sum();
    Ok(SimResult {
        avg_aoi,
        psi_s_hat,
        psi_p_hat: collisions as f64 / arrivals as f64,
        success_count: successes,
        transmit_count: transmits,
        collision_count: collisions,
        slots,
        cycles: arrivals,
        aoi_divergence_flag: max_age > options.age_ceiling || successes == 0,
        avg_aoi_se: batch_se(&batches, |b| b.age as f64 / b.slots as f64),
        psi_s_se: batch_se(&batches, |b| b.collisions as f64 / b.slots as f64),
        idle_fraction: idle_total as f64 / slots as f64,
        idle_fraction_se: batch_se(&batches, |b| b.idle as f64 / b.slots as f64),
        channel_transitions: transitions,
        cycle_collision_violations: violations,
        max_age,
    })
}

// Standard error of the overall mean from batch means.
fn batch_se(batches: &[Batch], metric: impl Fn(&Batch) -> f64) -> f64 {
    let k = batches.len();
    if k < 2 {
        return f64::NAN;
    }
    let values: Vec<f64> = batches.iter().map(metric).collect();
    let mean = values.iter().sum::<f64>() / k as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (var / k as f64).sqrt()
}
