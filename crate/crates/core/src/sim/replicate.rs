use rayon::prelude::*;

use super::{simulate, SimConfig, SimResult};
use crate::error::{invalid, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `i`: the base seed itself for `i = 0`, otherwise
/// `splitmix64(base + i * 0x9E3779B97F4A7C15)` with wrapping arithmetic.
pub fn replication_seed(base: u64, i: u64) -> u64 {
    if i == 0 {
        base
    } else {
        splitmix64(base.wrapping_add(i.wrapping_mul(GOLDEN_GAMMA)))
    }
}

/// Mean over replications and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    /// Zero for a single replication.
    pub se: f64,
}

impl MetricSummary {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = if values.len() < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        MetricSummary { mean, se }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicatedResult {
    /// Per-replication results in replication order.
    pub runs: Vec<SimResult>,
    pub avg_aoi: MetricSummary,
    pub psi_s_hat: MetricSummary,
    pub psi_p_hat: MetricSummary,
    pub throughput: MetricSummary,
    /// Whether any replication was flagged as divergent.
    pub any_divergent: bool,
}

impl ReplicatedResult {
    fn from_runs(runs: Vec<SimResult>) -> Self {
        ReplicatedResult {
            avg_aoi: MetricSummary::of(runs.iter().map(|r| r.avg_aoi)),
            psi_s_hat: MetricSummary::of(runs.iter().map(|r| r.psi_s_hat)),
            psi_p_hat: MetricSummary::of(runs.iter().map(|r| r.psi_p_hat)),
            throughput: MetricSummary::of(runs.iter().map(SimResult::throughput)),
            any_divergent: runs.iter().any(|r| r.aoi_divergence_flag),
            runs,
        }
    }
}

fn config_for(config: &SimConfig, i: u64) -> SimConfig {
    SimConfig {
        seed: replication_seed(config.seed, i),
        ..config.clone()
    }
}

/// Runs `n_reps` independent replications in parallel.
pub fn replicate(config: &SimConfig, n_reps: u64) -> Result<ReplicatedResult> {
    if n_reps == 0 {
        return Err(invalid("n_reps", "must be at least 1"));
    }
    let runs = (0..n_reps)
        .into_par_iter()
        .map(|i| simulate(&config_for(config, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicatedResult::from_runs(runs))
}

/// As [`replicate`], on the calling thread.
pub fn replicate_serial(config: &SimConfig, n_reps: u64) -> Result<ReplicatedResult> {
    if n_reps == 0 {
        return Err(invalid("n_reps", "must be at least 1"));
    }
    let runs = (0..n_reps)
        .map(|i| simulate(&config_for(config, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicatedResult::from_runs(runs))
}
