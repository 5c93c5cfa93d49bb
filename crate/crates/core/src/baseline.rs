//! Throughput-optimal benchmark: transmit with a fixed probability in every
//! idle-sensed slot, sized so that the collision budget is used exactly.

use crate::channel::idle_probability;
use crate::closed_form::AgeChain;
use crate::error::{invalid, Result};
use crate::params::SystemParams;

/// Bernoulli access probability and whether the budget had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliPolicy {
    pub p0: f64,
    /// The budget exceeds what always-transmit-when-idle can use; `p0` is 1.
    pub slack: bool,
}

/// Largest access probability whose collision rate stays within `eta_s`.
pub fn optimal_transmit_probability(params: &SystemParams) -> BernoulliPolicy {
    let full = idle_probability(&params.rates) * params.collision_on_transmit();
    let p0 = params.eta_s() / full;
    if p0 >= 1.0 {
        BernoulliPolicy { p0: 1.0, slack: p0 > 1.0 }
    } else {
        BernoulliPolicy { p0, slack: false }
    }
}

fn check_p0(p0: f64) -> Result<()> {
    if p0 > 0.0 && p0 <= 1.0 {
        Ok(())
    } else {
        Err(invalid("p0", format!("must lie in (0, 1], got {p0}")))
    }
}

/// Long-run fraction of slots that carry a transmission.
pub fn throughput(params: &SystemParams, p0: f64) -> Result<f64> {
    check_p0(p0)?;
    Ok(idle_probability(&params.rates) * p0)
}

/// Collision rate per slot under access probability `p0`.
pub fn bernoulli_collision_probability(params: &SystemParams, p0: f64) -> Result<f64> {
    Ok(throughput(params, p0)? * params.collision_on_transmit())
}

/// Closed-form average age under access probability `p0`.
pub fn average_aoi_bernoulli(params: &SystemParams, p0: f64) -> Result<f64> {
    check_p0(p0)?;
    let (a, b, phi) = (params.alpha(), params.beta(), params.phi_s());
    let s = a + b;
    Ok(s * a.exp() / (b * (1.0 - phi) * p0) + a * s.exp() / (b * s.exp_m1()))
}

/// Stationary `(theta(delta, idle), theta(delta, busy))` under access probability `p0`.
pub fn bernoulli_steady_state(params: &SystemParams, p0: f64, delta: u32) -> Result<(f64, f64)> {
    if delta == 0 {
        return Err(invalid("delta", "age starts at 1"));
    }
    Ok(AgeChain::bernoulli(params, p0)?.state(delta))
}

/// Average age obtained by summing the stationary distribution.
pub fn average_aoi_bernoulli_series(params: &SystemParams, p0: f64) -> Result<f64> {
    Ok(AgeChain::bernoulli(params, p0)?.mean_age())
}
