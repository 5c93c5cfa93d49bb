//! Analytical results for threshold, randomized-threshold and Bernoulli policies.
//!
//! Under all three policies the stationary chain over `(age, occupancy)`
//! has the same shape: a head of ages where the device never transmits, in
//! which every age carries mass `theta(1, idle)` spread over occupancies by
//! the channel matrix power, followed by a tail driven by a fixed 2x2
//! recursion whose powers are available in closed form. The tail is summed
//! exactly, so normalization and moments need no truncation.

mod lambert;
mod spectral;

pub use lambert::lambert_w0;
pub use spectral::{SpectralConstants, TailSums};

use crate::channel::{slot_transition_matrix, transition_matrix_power, PuRates};
use crate::error::{invalid, Error, Result};
use crate::numeric::CompensatedSum;
use crate::params::SystemParams;
use crate::policy::Policy;

/// Closed-form mass of the post-delivery state `(1, idle)` under threshold `gamma`.
pub fn theta_1_0(gamma: u32, params: &SystemParams) -> f64 {
    assert!(gamma >= 1, "threshold must be at least 1");
    let (a, b) = (params.alpha(), params.beta());
    let s = a + b;
    let g = f64::from(gamma);
    let cycle_decay = -(-s).exp_m1();
    let head_decay = -(-s * (g - 1.0)).exp_m1();
    let denom = g - 1.0
        + s / (b * params.success_probability())
        + a / (cycle_decay * b) * head_decay;
    1.0 / denom
}

/// Per-slot collision probability of threshold `gamma`.
pub fn collision_probability(gamma: u32, params: &SystemParams) -> f64 {
    theta_1_0(gamma, params) * params.collision_on_transmit() / params.success_probability()
}

/// Stationary distribution of one of the three analysable policies, kept in
/// head/tail form.
#[derive(Debug, Clone)]
pub(crate) struct AgeChain {
    rates: PuRates,
    // Ages 1..=head_len follow the channel alone; later ages follow `spectral`.
    head_len: u32,
    tail_entry: (f64, f64),
    spectral: SpectralConstants,
    collision_on_transmit: f64,
    norm: f64,
    mean_age: f64,
    collision_mass: f64,
}

impl AgeChain {
    pub(crate) fn threshold(params: &SystemParams, gamma: u32) -> Result<Self> {
        if gamma == 0 {
            return Err(invalid("gamma", "threshold must be at least 1"));
        }
        let channel = slot_transition_matrix(&params.rates);
        let stay = channel.p_ii - params.success_probability();
        let entry = head_row(&params.rates, gamma);
        AgeChain::build(params, gamma - 1, None, entry, 1.0, stay)
    }

    pub(crate) fn mixed(params: &SystemParams, gamma1: u32, mu: f64) -> Result<Self> {
        if gamma1 == 0 {
            return Err(invalid("gamma1", "threshold must be at least 1"));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(invalid("mu", format!("must lie in [0, 1], got {mu}")));
        }
        let channel = slot_transition_matrix(&params.rates);
        let stay = channel.p_ii - params.success_probability();
        let at_boundary = head_row(&params.rates, gamma1);
        let after = head_row(&params.rates, gamma1 + 1);
        let entry = (after.0 - mu * params.success_probability() * at_boundary.0, after.1);
        AgeChain::build(params, gamma1, Some((gamma1, mu)), entry, 1.0, stay)
    }

    pub(crate) fn bernoulli(params: &SystemParams, p0: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0 <= 1.0) {
            return Err(invalid("p0", format!("must lie in (0, 1], got {p0}")));
        }
        let channel = slot_transition_matrix(&params.rates);
        let stay = channel.p_ii - p0 * params.success_probability();
        AgeChain::build(params, 0, None, (1.0, 0.0), p0, stay)
    }

    // `boundary` is an age inside the head that transmits with the given
    // probability; the head values stay as for a silent age because the
    // boundary's effect is folded into `tail_entry`.
    fn build(
        params: &SystemParams,
        head_len: u32,
        boundary: Option<(u32, f64)>,
        tail_entry: (f64, f64),
        tail_transmit: f64,
        stay: f64,
    ) -> Result<Self> {
        let channel = slot_transition_matrix(&params.rates);
        let spectral = SpectralConstants::new(stay, &channel)?;

        let mut mass = CompensatedSum::default();
        let mut moment = CompensatedSum::default();
        for delta in 1..=head_len {
            let (i, b) = head_row(&params.rates, delta);
            mass.add(i);
            mass.add(b);
            moment.add(f64::from(delta) * (i + b));
        }
        let tail = spectral.tail_sums(tail_entry);
        let start = f64::from(head_len + 1);
        mass.add(tail.idle);
        mass.add(tail.busy);
        moment.add(start * (tail.idle + tail.busy));
        moment.add(tail.idle_moment + tail.busy_moment);

        let mut transmit_idle = tail_transmit * tail.idle;
        if let Some((age, mu)) = boundary {
            transmit_idle += mu * head_row(&params.rates, age).0;
        }

        let norm = 1.0 / mass.value();
        Ok(AgeChain {
            rates: params.rates,
            head_len,
            tail_entry,
            spectral,
            collision_on_transmit: params.collision_on_transmit(),
            norm,
            mean_age: moment.value() * norm,
            collision_mass: transmit_idle * norm,
        })
    }

    /// Normalized `(theta(delta, idle), theta(delta, busy))`.
    pub(crate) fn state(&self, delta: u32) -> (f64, f64) {
        assert!(delta >= 1, "age starts at 1");
        let (i, b) = if delta <= self.head_len {
            head_row(&self.rates, delta)
        } else {
            self.spectral.propagate(self.tail_entry, delta - self.head_len - 1)
        };
        (i * self.norm, b * self.norm)
    }

    #[cfg(test)]
    pub(crate) fn theta_1_0(&self) -> f64 {
        self.state(1).0
    }

    pub(crate) fn mean_age(&self) -> f64 {
        self.mean_age
    }

    pub(crate) fn collision_rate(&self) -> f64 {
        self.collision_mass * self.collision_on_transmit
    }
}

// Unnormalized head row: the (1, idle) row of the channel matrix to the power delta - 1.
fn head_row(rates: &PuRates, delta: u32) -> (f64, f64) {
    let p = transition_matrix_power(rates, f64::from(delta - 1));
    (p.p_ii, p.p_ib)
}

/// Summary of a deterministic threshold policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdAnalysis {
    pub gamma: u32,
    pub theta_1_0: f64,
    pub psi_s: f64,
    pub avg_aoi: f64,
}

pub fn analyze_threshold(gamma: u32, params: &SystemParams) -> Result<ThresholdAnalysis> {
    let chain = AgeChain::threshold(params, gamma)?;
    Ok(ThresholdAnalysis {
        gamma,
        theta_1_0: theta_1_0(gamma, params),
        psi_s: collision_probability(gamma, params),
        avg_aoi: chain.mean_age(),
    })
}

/// Spectral constants of the transmitting regime of a threshold policy.
pub fn spectral_constants(params: &SystemParams) -> Result<SpectralConstants> {
    let channel = slot_transition_matrix(&params.rates);
    SpectralConstants::new(channel.p_ii - params.success_probability(), &channel)
}

/// Stationary `(theta(delta, idle), theta(delta, busy))` under threshold `gamma`.
pub fn steady_state(gamma: u32, params: &SystemParams, delta: u32) -> Result<(f64, f64)> {
    if delta == 0 {
        return Err(invalid("delta", "age starts at 1"));
    }
    Ok(AgeChain::threshold(params, gamma)?.state(delta))
}

/// Average age under threshold `gamma`, from the stationary distribution
/// with the transmitting tail summed in closed form.
pub fn average_aoi_series(gamma: u32, params: &SystemParams) -> Result<f64> {
    Ok(AgeChain::threshold(params, gamma)?.mean_age())
}

/// Relative agreement required between [`average_aoi_closed_form`] and the series.
pub const CLOSED_FORM_SELF_CHECK: f64 = 1e-6;

/// Closed-form average age under threshold `gamma`.
///
/// Every decay factor is `exp(-(alpha + beta))` and the growth factor in the
/// auxiliary constant is `exp(alpha)`; with these exponents the expression
/// reproduces the stationary-series mean to rounding error. The result is
/// checked against [`average_aoi_series`].
pub fn average_aoi_closed_form(gamma: u32, params: &SystemParams) -> Result<f64> {
    let value = average_aoi_closed_form_unchecked(gamma, params);
    let series = average_aoi_series(gamma, params)?;
    if !value.is_finite() || ((value - series) / series).abs() > CLOSED_FORM_SELF_CHECK {
        return Err(Error::ClosedFormMismatch {
            closed_form: value,
            series,
        });
    }
    Ok(value)
}

pub(crate) fn average_aoi_closed_form_unchecked(gamma: u32, params: &SystemParams) -> f64 {
    let (a, b, phi) = (params.alpha(), params.beta(), params.phi_s());
    let s = a + b;
    let g = f64::from(gamma);
    let keep = 1.0 - phi;
    let one_minus_decay = -(-s).exp_m1();
    let growth_m1 = s.exp_m1();
    let head_decay = (-s * (g - 1.0)).exp();
    let success_term = s / (b * (-a).exp() * keep);

    let xi = (s * a.exp() + a * keep).powi(2) / (b * b * keep * keep) - s * a.exp() / (b * keep)
        + (2.0 * a * s * (a.exp() + keep) / (b * b * keep) - a / b) / growth_m1
        + a * s / (b * b * growth_m1 * growth_m1);

    let numerator = g * (g - 1.0) / 2.0
        - (1.0 - s / (b * one_minus_decay) - success_term) * a * head_decay / (b * one_minus_decay)
        - xi;
    let denominator = g - 1.0 + success_term + a / (one_minus_decay * b) * (1.0 - head_decay);
    g - numerator / denominator
}

/// Real-valued threshold solving `psi_s(gamma) = eta_s` via Lambert W.
pub fn continuous_threshold(params: &SystemParams) -> Result<f64> {
    let (a, b, phi, eta) = (params.alpha(), params.beta(), params.phi_s(), params.eta_s());
    let s = a + b;
    let one_minus_decay = -(-s).exp_m1();
    let stay_idle = (-a).exp();
    let leave_idle = -(-a).exp_m1();
    let k = a / (b * one_minus_decay);
    let upsilon = s * one_minus_decay / (a * stay_idle * (1.0 - phi)) + 1.0
        - leave_idle * one_minus_decay * b / (eta * (1.0 - phi) * stay_idle * a);
    let arg = s * k * (s * k * upsilon).exp();
    Ok(lambert_w0(arg)? / s - k * upsilon + 1.0)
}

/// Largest threshold meeting `psi_s >= eta_s` and smallest meeting
/// `psi_s <= eta_s`.
///
/// Uses the Lambert W solution and confirms the bracket against
/// [`collision_probability`]; if rounding puts the bracket one step off, a
/// local scan decides and the discrepancy is logged. A slack budget
/// (`psi_s(1) <= eta_s`) gives `(1, 1)`.
pub fn optimal_thresholds(params: &SystemParams) -> Result<(u32, u32)> {
    let eta = params.eta_s();
    let psi = |g: u32| collision_probability(g, params);
    if psi(1) <= eta {
        return Ok((1, 1));
    }
    let candidate = continuous_threshold(params).ok().filter(|x| x.is_finite());
    if let Some(x) = candidate {
        if x >= 1.0 && x < f64::from(u32::MAX - 1) {
            let (g1, g2) = (x.floor() as u32, x.ceil() as u32);
            let bracket_ok = psi(g1) >= eta && psi(g2) <= eta && (g1 == g2) == (psi(g1) == eta);
            if bracket_ok {
                return Ok((g1, g2));
            }
        }
    }

    let scanned = scan_thresholds(params)?;
    log::warn!(
        "lambert-W threshold {:?} disagrees with scan {:?} (eta_s = {eta}); using the scan",
        candidate,
        scanned
    );
    Ok(scanned)
}

/// Brute-force bracket by exponential search on `collision_probability`.
pub fn scan_thresholds(params: &SystemParams) -> Result<(u32, u32)> {
    let eta = params.eta_s();
    let psi = |g: u32| collision_probability(g, params);
    if psi(1) <= eta {
        return Ok((1, 1));
    }
    let mut hi: u32 = 2;
    while psi(hi) > eta {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::ThresholdBracket(format!("no threshold reaches eta_s = {eta}")))?;
    }
    // psi(lo) > eta >= psi(hi)
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if psi(mid) > eta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if psi(hi) == eta {
        Ok((hi, hi))
    } else {
        Ok((lo, hi))
    }
}

/// Transmit probability at age `gamma1` that makes the randomized policy
/// meet the budget with equality.
pub fn randomization_mu(params: &SystemParams, gamma1: u32) -> Result<f64> {
    if gamma1 == 0 {
        return Err(invalid("gamma1", "threshold must be at least 1"));
    }
    let (a, b, phi, eta) = (params.alpha(), params.beta(), params.phi_s(), params.eta_s());
    let s = a + b;
    let g = f64::from(gamma1);
    let leave_idle = -(-a).exp_m1();
    let success = (1.0 - phi) * (-a).exp();
    let bracket = g
        + (1.0 - leave_idle / eta + a / b) / success
        + a * (-(-s * g).exp_m1()) / (b * (-(-s).exp_m1()));
    let mu = bracket * b / (b + a * (-s * (g - 1.0)).exp());
    const SNAP: f64 = 1e-10;
    if !(-SNAP..=1.0 + SNAP).contains(&mu) {
        return Err(Error::MixingOutOfRange(mu));
    }
    Ok(mu.clamp(0.0, 1.0))
}

/// Stationary distribution of the randomized threshold pair `(gamma1, gamma1 + 1)`.
pub fn mixed_policy_steady_state(
    params: &SystemParams,
    gamma1: u32,
    mu: f64,
    delta: u32,
) -> Result<(f64, f64)> {
    if delta == 0 {
        return Err(invalid("delta", "age starts at 1"));
    }
    Ok(AgeChain::mixed(params, gamma1, mu)?.state(delta))
}

/// Average age and collision probability of a randomized policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedMetrics {
    pub avg_aoi: f64,
    pub psi_s: f64,
}

pub fn mixed_policy_metrics(params: &SystemParams, gamma1: u32, mu: f64) -> Result<MixedMetrics> {
    let chain = AgeChain::mixed(params, gamma1, mu)?;
    Ok(MixedMetrics {
        avg_aoi: chain.mean_age(),
        psi_s: chain.collision_rate(),
    })
}

/// The age-optimal policy computed in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPolicy {
    pub gamma1: u32,
    pub gamma2: u32,
    /// Transmit probability at age `gamma1`.
    pub mu: f64,
    pub avg_aoi: f64,
    pub psi_s: f64,
    /// Whether the collision budget is met with equality.
    pub binding: bool,
}

impl OptimalPolicy {
    pub fn solve(params: &SystemParams) -> Result<Self> {
        let (gamma1, gamma2) = optimal_thresholds(params)?;
        let (mu, metrics, binding) = if gamma1 == gamma2 {
            let chain = AgeChain::threshold(params, gamma1)?;
            let binding = collision_probability(gamma1, params) >= params.eta_s();
            (
                1.0,
                MixedMetrics {
                    avg_aoi: chain.mean_age(),
                    psi_s: chain.collision_rate(),
                },
                binding,
            )
        } else {
            let mu = randomization_mu(params, gamma1)?;
            (mu, mixed_policy_metrics(params, gamma1, mu)?, true)
        };
        Ok(OptimalPolicy {
            gamma1,
            gamma2,
            mu,
            avg_aoi: metrics.avg_aoi,
            psi_s: metrics.psi_s,
            binding,
        })
    }

    pub fn policy(&self) -> Policy {
        if self.gamma1 == self.gamma2 {
            Policy::Threshold { gamma: self.gamma1 }
        } else {
            Policy::Randomized {
                gamma1: self.gamma1,
                mu: self.mu,
            }
        }
    }
}
