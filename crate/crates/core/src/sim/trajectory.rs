use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{sample_sojourn, Occupancy, PuRates};
use crate::error::{invalid, Result};

/// ChaCha stream reserved for channel sojourns.
pub(crate) const TRAJECTORY_STREAM: u64 = 0;
/// ChaCha stream reserved for policy randomization and outage draws.
pub(crate) const DECISION_STREAM: u64 = 1;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Continuous-time occupancy path of the primary user.
///
/// Segment `k` has occupancy `initial` for even `k` and the opposite one for
/// odd `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PuTrajectory {
    pub initial: Occupancy,
    pub durations: Vec<f64>,
    /// Busy-idle cycles contained in the path.
    pub total_cycles: u64,
}

impl PuTrajectory {
    pub fn occupancy(&self, segment: usize) -> Occupancy {
        if segment.is_multiple_of(2) {
            self.initial
        } else {
            self.initial.flip()
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = (Occupancy, f64)> + '_ {
        self.durations.iter().enumerate().map(|(k, &d)| (self.occupancy(k), d))
    }

    pub fn total_duration(&self) -> f64 {
        self.durations.iter().sum()
    }

    /// Number of whole slots covered by the path.
    pub fn whole_slots(&self) -> u64 {
        self.total_duration().floor() as u64
    }
}

/// Draws `n_cycles` busy-idle cycles; a path that starts idle gets one
/// leading idle sojourn in addition.
pub fn generate_pu_trajectory(
    rates: &PuRates,
    n_cycles: u64,
    seed: u64,
    initial: Occupancy,
) -> Result<PuTrajectory> {
    if n_cycles == 0 {
        return Err(invalid("n_cycles", "must be at least 1"));
    }
    let mut rng = stream_rng(seed, TRAJECTORY_STREAM);
    let lead = usize::from(initial == Occupancy::Idle);
    let n = 2 * n_cycles as usize + lead;
    let mut durations = Vec::with_capacity(n);
    let mut occ = initial;
    for _ in 0..n {
        durations.push(sample_sojourn(rates, occ, &mut rng));
        occ = occ.flip();
    }
    Ok(PuTrajectory {
        initial,
        durations,
        total_cycles: n_cycles,
    })
}

/// Draws sojourns until the path covers at least `slots` whole slots.
pub fn generate_pu_trajectory_for_slots(
    rates: &PuRates,
    slots: u64,
    seed: u64,
    initial: Occupancy,
) -> Result<PuTrajectory> {
    if slots == 0 {
        return Err(invalid("slots", "must be at least 1"));
    }
    let mut rng = stream_rng(seed, TRAJECTORY_STREAM);
    let mut durations = Vec::new();
    let mut occ = initial;
    let mut total = 0.0;
    let mut cycles = 0;
    while total < slots as f64 {
        let d = sample_sojourn(rates, occ, &mut rng);
        durations.push(d);
        total += d;
        if occ == Occupancy::Idle && durations.len() > 1 {
            cycles += 1;
        }
        occ = occ.flip();
    }
    Ok(PuTrajectory {
        initial,
        durations,
        total_cycles: cycles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates() -> PuRates {
        PuRates::new(0.02, 0.4).unwrap()
    }

    #[test]
    fn same_seed_same_path() {
        let a = generate_pu_trajectory(&rates(), 1000, 9, Occupancy::Idle).unwrap();
        let b = generate_pu_trajectory(&rates(), 1000, 9, Occupancy::Idle).unwrap();
        assert_eq!(a, b);
        let c = generate_pu_trajectory(&rates(), 1000, 10, Occupancy::Idle).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn segment_counts() {
        let idle = generate_pu_trajectory(&rates(), 7, 1, Occupancy::Idle).unwrap();
        assert_eq!(idle.durations.len(), 15);
        assert_eq!(idle.total_cycles, 7);
        let busy = generate_pu_trajectory(&rates(), 7, 1, Occupancy::Busy).unwrap();
        assert_eq!(busy.durations.len(), 14);
        assert_eq!(busy.occupancy(0), Occupancy::Busy);
        assert_eq!(busy.occupancy(1), Occupancy::Idle);
        assert!(busy.durations.iter().all(|&d| d > 0.0));
        assert!(generate_pu_trajectory(&rates(), 0, 1, Occupancy::Idle).is_err());
    }

    #[test]
    fn mean_idle_sojourn() {
        let n = 100_000;
        let t = generate_pu_trajectory(&rates(), n, 5, Occupancy::Busy).unwrap();
        let idle: Vec<f64> = t
            .segments()
            .filter(|s| s.0 == Occupancy::Idle)
            .map(|s| s.1)
            .collect();
        assert_eq!(idle.len() as u64, n);
        let mean = idle.iter().sum::<f64>() / n as f64;
        // exponential: standard deviation equals the mean
        let se = 50.0 / (n as f64).sqrt();
        assert!((mean - 50.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn slot_horizon_covers_request() {
        let t = generate_pu_trajectory_for_slots(&rates(), 10_000, 3, Occupancy::Idle).unwrap();
        assert!(t.whole_slots() >= 10_000);
        let short = t.total_duration() - t.durations.last().unwrap();
        assert!(short < 10_000.0);
    }
}
