//! Transmission policies of the secondary device.
//!
//! Every policy maps the age at a slot start to a transmit probability that
//! applies only when the channel is sensed idle; busy slots never transmit.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Stationary transmission policy.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// Transmit whenever idle and the age is at least `gamma`.
    Threshold { gamma: u32 },
    /// Transmit with probability `mu` at age `gamma1`, always from
    /// `gamma1 + 1` on, never below.
    Randomized { gamma1: u32, mu: f64 },
    /// Transmit with a fixed probability in every idle slot.
    Bernoulli { p0: f64 },
    /// Per-age transmit probabilities; ages past the table reuse its last entry.
    Tabular(TabularPolicy),
}

/// Transmit probability for idle ages `1..=len`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    transmit: Vec<f64>,
}

impl TabularPolicy {
    pub fn new(transmit: Vec<f64>) -> Result<Self> {
        if transmit.is_empty() {
            return Err(invalid("tabular policy", "needs at least one age"));
        }
        if let Some(p) = transmit.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(invalid("tabular policy", format!("probability {p} outside [0, 1]")));
        }
        Ok(TabularPolicy { transmit })
    }

    pub fn from_decisions(decisions: &[bool]) -> Result<Self> {
        TabularPolicy::new(decisions.iter().map(|&d| if d { 1.0 } else { 0.0 }).collect())
    }

    pub fn len(&self) -> usize {
        self.transmit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmit.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.transmit
    }
}

impl Policy {
    pub fn threshold(gamma: u32) -> Result<Self> {
        if gamma == 0 {
            return Err(invalid("gamma", "threshold must be at least 1"));
        }
        Ok(Policy::Threshold { gamma })
    }

    pub fn randomized(gamma1: u32, mu: f64) -> Result<Self> {
        if gamma1 == 0 {
            return Err(invalid("gamma1", "threshold must be at least 1"));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(invalid("mu", format!("must lie in [0, 1], got {mu}")));
        }
        Ok(Policy::Randomized { gamma1, mu })
    }

    pub fn bernoulli(p0: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0 <= 1.0) {
            return Err(invalid("p0", format!("must lie in (0, 1], got {p0}")));
        }
        Ok(Policy::Bernoulli { p0 })
    }

    /// A policy that never transmits.
    pub fn never() -> Self {
        Policy::Tabular(TabularPolicy { transmit: vec![0.0] })
    }

    /// Probability of transmitting at an idle slot with the given age.
    pub fn transmit_probability(&self, delta: u64) -> f64 {
        match self {
            Policy::Threshold { gamma } => {
                if delta >= u64::from(*gamma) {
                    1.0
                } else {
                    0.0
                }
            }
            Policy::Randomized { gamma1, mu } => {
                let g = u64::from(*gamma1);
                if delta > g {
                    1.0
                } else if delta == g {
                    *mu
                } else {
                    0.0
                }
            }
            Policy::Bernoulli { p0 } => *p0,
            Policy::Tabular(t) => {
                let idx = (delta.max(1) - 1).min(t.transmit.len() as u64 - 1) as usize;
                t.transmit[idx]
            }
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Threshold { gamma } => write!(f, "threshold:{gamma}"),
            Policy::Randomized { gamma1, mu } => write!(f, "mixed:{gamma1},{mu}"),
            Policy::Bernoulli { p0 } => write!(f, "bernoulli:{p0}"),
            Policy::Tabular(t) => write!(f, "tabular[{}]", t.len()),
        }
    }
}

/// Parses `threshold:<gamma>`, `mixed:<gamma>,<mu>` or `bernoulli:<p0>`.
impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: &str| Error::PolicyParse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| fail("expected `<kind>:<arguments>`"))?;
        let rest = rest.trim();
        let policy = match kind.trim() {
            "threshold" => {
                let gamma: u32 = rest.parse().map_err(|_| fail("threshold must be a positive integer"))?;
                Policy::threshold(gamma)
            }
            "mixed" => {
                let (g, m) = rest
                    .split_once(',')
                    .ok_or_else(|| fail("expected `mixed:<gamma>,<mu>`"))?;
                let gamma1: u32 = g.trim().parse().map_err(|_| fail("threshold must be a positive integer"))?;
                let mu: f64 = m.trim().parse().map_err(|_| fail("mu must be a number"))?;
                Policy::randomized(gamma1, mu)
            }
            "bernoulli" => {
                let p0: f64 = rest.parse().map_err(|_| fail("p0 must be a number"))?;
                Policy::bernoulli(p0)
            }
            _ => return Err(fail("unknown policy kind; use threshold, mixed or bernoulli")),
        };
        policy.map_err(|e| fail(&e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grammar() {
        assert_eq!("threshold:20".parse::<Policy>().unwrap(), Policy::Threshold { gamma: 20 });
        assert_eq!(
            "mixed:24,0.5".parse::<Policy>().unwrap(),
            Policy::Randomized { gamma1: 24, mu: 0.5 }
        );
        assert_eq!("bernoulli:0.25".parse::<Policy>().unwrap(), Policy::Bernoulli { p0: 0.25 });
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["threshold:0", "threshold:-3", "threshold", "mixed:3", "mixed:3,1.5", "bernoulli:0", "greedy:1"] {
            assert!(bad.parse::<Policy>().is_err(), "{bad} should fail");
        }
    }

    #[test]
    fn randomized_probabilities() {
        let p = Policy::randomized(5, 0.3).unwrap();
        assert_eq!(p.transmit_probability(4), 0.0);
        assert_eq!(p.transmit_probability(5), 0.3);
        assert_eq!(p.transmit_probability(6), 1.0);
    }

    #[test]
    fn tabular_reuses_last_entry() {
        let t = Policy::Tabular(TabularPolicy::from_decisions(&[false, true]).unwrap());
        assert_eq!(t.transmit_probability(1), 0.0);
        assert_eq!(t.transmit_probability(100), 1.0);
        assert_eq!(Policy::never().transmit_probability(7), 0.0);
    }

    #[test]
    fn display_round_trips() {
        for s in ["threshold:7", "mixed:3,0.25", "bernoulli:0.5"] {
            assert_eq!(s.parse::<Policy>().unwrap().to_string(), s);
        }
    }
}
