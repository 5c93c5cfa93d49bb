use crate::channel::{convert_collision_budget, BudgetDirection, PuRates};
use crate::error::{invalid, Result};

/// A full problem instance: channel rates, device outage probability and
/// the per-slot collision budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub rates: PuRates,
    phi_s: f64,
    eta_s: f64,
}

impl SystemParams {
    pub fn new(rates: PuRates, phi_s: f64, eta_s: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&phi_s) {
            return Err(invalid("phi_s", format!("must lie in [0, 1), got {phi_s}")));
        }
        if !(eta_s > 0.0 && eta_s < 1.0) {
            return Err(invalid("eta_s", format!("must lie in (0, 1), got {eta_s}")));
        }
        Ok(SystemParams { rates, phi_s, eta_s })
    }

    /// Builds an instance from a per-cycle budget of the primary user.
    pub fn with_pu_budget(rates: PuRates, phi_s: f64, eta_p: f64) -> Result<Self> {
        let eta_s = convert_collision_budget(&rates, eta_p, BudgetDirection::PuToSiot)?;
        SystemParams::new(rates, phi_s, eta_s)
    }

    pub fn phi_s(&self) -> f64 {
        self.phi_s
    }

    pub fn eta_s(&self) -> f64 {
        self.eta_s
    }

    /// Per-cycle budget equivalent to `eta_s`.
    pub fn eta_p(&self) -> f64 {
        self.eta_s * self.rates.mean_cycle_length()
    }

    pub fn alpha(&self) -> f64 {
        self.rates.alpha()
    }

    pub fn beta(&self) -> f64 {
        self.rates.beta()
    }

    /// Same instance with a different per-slot budget.
    pub fn with_eta_s(&self, eta_s: f64) -> Result<Self> {
        SystemParams::new(self.rates, self.phi_s, eta_s)
    }

    /// Probability that a transmission started in an idle slot is received.
    pub fn success_probability(&self) -> f64 {
        (1.0 - self.phi_s) * self.rates.stay_idle_probability()
    }

    /// Probability that the primary user returns during a transmitting slot.
    pub fn collision_on_transmit(&self) -> f64 {
        -(-self.rates.alpha()).exp_m1()
    }
}
