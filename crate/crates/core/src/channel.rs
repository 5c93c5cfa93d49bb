//! Primary-user channel model.
//!
//! The primary user alternates between idle and busy sojourns that are
//! exponentially distributed with rates `alpha` (idle to busy) and `beta`
//! (busy to idle). All rates are per unit slot; the secondary device senses
//! the channel once per slot, so the slot-level occupancy process is the
//! continuous-time chain sampled at integer instants.

use rand::Rng;

use crate::error::{invalid, Error, Result};

/// Channel occupancy as seen at a sensing instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Occupancy {
    Idle,
    Busy,
}

impl Occupancy {
    pub fn flip(self) -> Self {
        match self {
            Occupancy::Idle => Occupancy::Busy,
            Occupancy::Busy => Occupancy::Idle,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Occupancy::Idle => 0,
            Occupancy::Busy => 1,
        }
    }
}

/// Activity rates of the primary user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PuRates {
    alpha: f64,
    beta: f64,
}

impl PuRates {
    /// Builds a rate pair. Both rates must be finite and positive.
    ///
    /// A busy period that is on average longer than the idle period
    /// (`beta <= alpha`) is accepted with a warning.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid("alpha", format!("must be finite and > 0, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(invalid("beta", format!("must be finite and > 0, got {beta}")));
        }
        if beta <= alpha {
            log::warn!(
                "beta ({beta}) <= alpha ({alpha}): the primary user is busy at least half of the time"
            );
        }
        Ok(PuRates { alpha, beta })
    }

    /// Rates with a prescribed long-run idle probability: `beta = alpha * p_i / (1 - p_i)`.
    pub fn with_idle_probability(alpha: f64, p_idle: f64) -> Result<Self> {
        if !(p_idle > 0.0 && p_idle < 1.0) {
            return Err(invalid("p_idle", format!("must lie in (0, 1), got {p_idle}")));
        }
        PuRates::new(alpha, alpha * p_idle / (1.0 - p_idle))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Mean length of one busy-idle cycle, `1/alpha + 1/beta`.
    pub fn mean_cycle_length(&self) -> f64 {
        1.0 / self.alpha + 1.0 / self.beta
    }

    /// Probability that the channel stays idle for a whole slot given it is
    /// idle at the slot start, `exp(-alpha)`.
    pub fn stay_idle_probability(&self) -> f64 {
        (-self.alpha).exp()
    }

    /// Rate of leaving the given occupancy.
    pub fn leave_rate(&self, occupancy: Occupancy) -> f64 {
        match occupancy {
            Occupancy::Idle => self.alpha,
            Occupancy::Busy => self.beta,
        }
    }
}

/// Occupancy transition probabilities across a time interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelTransition {
    pub p_ii: f64,
    pub p_ib: f64,
    pub p_bi: f64,
    pub p_bb: f64,
}

impl ChannelTransition {
    /// Probability of moving from `from` to `to`.
    pub fn prob(&self, from: Occupancy, to: Occupancy) -> f64 {
        match (from, to) {
            (Occupancy::Idle, Occupancy::Idle) => self.p_ii,
            (Occupancy::Idle, Occupancy::Busy) => self.p_ib,
            (Occupancy::Busy, Occupancy::Idle) => self.p_bi,
            (Occupancy::Busy, Occupancy::Busy) => self.p_bb,
        }
    }

    /// Chains two transitions: `self` followed by `next`.
    pub fn compose(&self, next: &ChannelTransition) -> ChannelTransition {
        ChannelTransition {
            p_ii: self.p_ii * next.p_ii + self.p_ib * next.p_bi,
            p_ib: self.p_ii * next.p_ib + self.p_ib * next.p_bb,
            p_bi: self.p_bi * next.p_ii + self.p_bb * next.p_bi,
            p_bb: self.p_bi * next.p_ib + self.p_bb * next.p_bb,
        }
    }

    /// Propagates a row vector `(idle, busy)` one step.
    pub fn apply(&self, row: (f64, f64)) -> (f64, f64) {
        (
            row.0 * self.p_ii + row.1 * self.p_bi,
            row.0 * self.p_ib + row.1 * self.p_bb,
        )
    }
}

/// Transition matrix of the sampled chain over one slot.
pub fn slot_transition_matrix(rates: &PuRates) -> ChannelTransition {
    transition_matrix_power(rates, 1.0)
}

/// Transition matrix over an interval of length `t` (slots), i.e. the
/// `t`-th power of the one-slot matrix in closed form.
pub fn transition_matrix_power(rates: &PuRates, t: f64) -> ChannelTransition {
    assert!(t >= 0.0, "interval length must be nonnegative, got {t}");
    power_from_raw(rates.alpha, rates.beta, t)
}

// Also valid at alpha = 0 or beta = 0 (but not both), which the public
// constructors exclude.
pub(crate) fn power_from_raw(alpha: f64, beta: f64, t: f64) -> ChannelTransition {
    let total = alpha + beta;
    let decay = (-total * t).exp();
    let leave = -(-total * t).exp_m1();
    ChannelTransition {
        p_ii: (beta + alpha * decay) / total,
        p_ib: alpha * leave / total,
        p_bi: beta * leave / total,
        p_bb: (alpha + beta * decay) / total,
    }
}

/// Long-run fraction of time the primary user is idle, `beta / (alpha + beta)`.
pub fn idle_probability(rates: &PuRates) -> f64 {
    rates.beta / (rates.alpha + rates.beta)
}

/// Direction of a collision-budget conversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetDirection {
    /// Per-cycle budget of the primary user to per-slot budget of the device.
    PuToSiot,
    /// Per-slot budget of the device to per-cycle budget of the primary user.
    SiotToPu,
}

/// Converts between collisions per busy-idle cycle and collisions per slot.
///
/// The two budgets differ by the mean cycle length `1/alpha + 1/beta`. The
/// per-slot value is returned unclamped; a per-cycle value above one is
/// rejected as a meaningless budget.
pub fn convert_collision_budget(
    rates: &PuRates,
    value: f64,
    direction: BudgetDirection,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&value) {
        return Err(invalid("collision budget", format!("must lie in [0, 1], got {value}")));
    }
    let cycle = rates.mean_cycle_length();
    match direction {
        BudgetDirection::PuToSiot => Ok(value / cycle),
        BudgetDirection::SiotToPu => {
            let eta_p = value * cycle;
            if eta_p > 1.0 {
                Err(Error::InfeasibleBudget { value: eta_p })
            } else {
                Ok(eta_p)
            }
        }
    }
}

/// Exponential sojourn length via the inverse CDF of a uniform draw in (0, 1].
pub fn sojourn_from_uniform(rate: f64, u: f64) -> f64 {
    -u.ln() / rate
}

/// Draws the length of an idle or busy sojourn.
pub fn sample_sojourn<R: Rng + ?Sized>(rates: &PuRates, occupancy: Occupancy, rng: &mut R) -> f64 {
    // random::<f64>() is in [0, 1); flip it so ln never sees zero.
    let u = 1.0 - rng.random::<f64>();
    sojourn_from_uniform(rates.leave_rate(occupancy), u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rates() -> PuRates {
        PuRates::new(0.02, 0.4).unwrap()
    }

    #[test]
    fn slot_matrix_matches_direct_formula() {
        let s = slot_transition_matrix(&rates());
        let expected = (0.4 + 0.02 * (-0.42f64).exp()) / 0.42;
        assert!((s.p_ii - expected).abs() < 1e-15);
        assert!((s.p_ii + s.p_ib - 1.0).abs() < 1e-12);
        assert!((s.p_bi + s.p_bb - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_alpha_limit_never_leaves_idle() {
        let s = power_from_raw(0.0, 0.4, 1.0);
        assert_eq!(s.p_ii, 1.0);
        assert_eq!(s.p_ib, 0.0);
    }

    #[test]
    fn power_at_one_is_slot_matrix() {
        let r = rates();
        let a = transition_matrix_power(&r, 1.0);
        let b = slot_transition_matrix(&r);
        for (x, y) in [(a.p_ii, b.p_ii), (a.p_ib, b.p_ib), (a.p_bi, b.p_bi), (a.p_bb, b.p_bb)] {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn power_converges_to_stationary_rows() {
        let r = rates();
        let s = transition_matrix_power(&r, 1e4);
        let p = idle_probability(&r);
        assert!((s.p_ii - p).abs() < 1e-10);
        assert!((s.p_bi - p).abs() < 1e-10);
        assert!((s.p_ib - (1.0 - p)).abs() < 1e-10);
        assert!((s.p_bb - (1.0 - p)).abs() < 1e-10);
    }

    #[test]
    fn integer_power_matches_repeated_product() {
        let r = rates();
        let one = slot_transition_matrix(&r);
        let mut prod = one;
        for _ in 1..5 {
            prod = prod.compose(&one);
        }
        let closed = transition_matrix_power(&r, 5.0);
        assert!((prod.p_ii - closed.p_ii).abs() < 1e-12);
        assert!((prod.p_ib - closed.p_ib).abs() < 1e-12);
        assert!((prod.p_bi - closed.p_bi).abs() < 1e-12);
        assert!((prod.p_bb - closed.p_bb).abs() < 1e-12);
    }

    #[test]
    fn idle_probability_values() {
        assert!((idle_probability(&rates()) - 0.4 / 0.42).abs() < 1e-15);
        assert!((idle_probability(&PuRates::new(0.3, 0.3).unwrap()) - 0.5).abs() < 1e-15);
        let table = PuRates::new(0.002, 0.006).unwrap();
        assert!((idle_probability(&table) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn budget_conversion() {
        let r = PuRates::new(0.002, 0.006).unwrap();
        let eta_s = convert_collision_budget(&r, 0.01, BudgetDirection::PuToSiot).unwrap();
        assert!((eta_s - 0.01 / (500.0 + 1000.0 / 6.0)).abs() < 1e-18);
        assert!((eta_s - 1.5e-5).abs() < 1e-15);
        let zero = convert_collision_budget(&r, 0.0, BudgetDirection::SiotToPu).unwrap();
        assert_eq!(zero, 0.0);
        let back = convert_collision_budget(&r, eta_s, BudgetDirection::SiotToPu).unwrap();
        assert!((back - 0.01).abs() < 1e-14);
        let err = convert_collision_budget(&r, 0.01, BudgetDirection::SiotToPu).unwrap_err();
        assert!(matches!(err, Error::InfeasibleBudget { .. }));
    }

    #[test]
    fn rejects_nonpositive_rates() {
        assert!(PuRates::new(0.0, 0.4).is_err());
        assert!(PuRates::new(0.1, -1.0).is_err());
        assert!(PuRates::new(f64::NAN, 0.4).is_err());
        // beta <= alpha only warns
        assert!(PuRates::new(0.5, 0.1).is_ok());
    }

    #[test]
    fn inverse_cdf_at_median() {
        let x = sojourn_from_uniform(0.02, 0.5);
        assert!((x - 0.5f64.ln().abs() / 0.02).abs() < 1e-12);
        assert!((x - 34.657).abs() < 1e-3);
    }

    #[test]
    fn sojourn_means() {
        let r = rates();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let idle: f64 = (0..n).map(|_| sample_sojourn(&r, Occupancy::Idle, &mut rng)).sum::<f64>() / n as f64;
        let busy: f64 = (0..n).map(|_| sample_sojourn(&r, Occupancy::Busy, &mut rng)).sum::<f64>() / n as f64;
        assert!((idle - 50.0).abs() < 0.5, "idle mean {idle}");
        assert!((busy - 2.5).abs() < 0.05, "busy mean {busy}");
    }

    #[test]
    fn sojourn_is_reproducible() {
        let r = rates();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..16).map(|_| sample_sojourn(&r, Occupancy::Busy, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }
}
