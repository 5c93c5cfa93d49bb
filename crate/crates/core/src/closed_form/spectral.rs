//! Eigen-decomposition of the two-state recursion
//!
//! ```text
//! (x_idle, x_busy)_{k+1} = (x_idle, x_busy)_k * [[stay, p_ib], [p_bi, 1 - p_bi]]
//! ```
//!
//! which governs the stationary mass of every age at which the device
//! transmits in idle slots. `stay` is the probability of remaining in an
//! idle state without a successful delivery.

use crate::channel::ChannelTransition;
use crate::error::{Error, Result};

/// Constants of the closed-form powers of the transmitting-regime matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConstants {
    /// Idle-to-idle entry of the recursion matrix.
    pub stay: f64,
    pub p_ib: f64,
    pub p_bi: f64,
    /// Gap between the two eigenvalues.
    pub gap: f64,
    /// Dominant eigenvalue.
    pub upper: f64,
    /// Subdominant eigenvalue.
    pub lower: f64,
    /// Idle/busy ratio of the dominant left eigenvector.
    pub upper_ratio: f64,
    /// Idle/busy ratio of the subdominant left eigenvector.
    pub lower_ratio: f64,
}

/// Sums of a geometric tail: total mass and first moment about its start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSums {
    pub idle: f64,
    pub busy: f64,
    /// `sum_k k * idle_k`.
    pub idle_moment: f64,
    /// `sum_k k * busy_k`.
    pub busy_moment: f64,
}

impl SpectralConstants {
    /// Decomposes `[[stay, p_ib], [p_bi, p_bb]]`; both eigenvalues must lie
    /// strictly inside the unit disc.
    pub fn new(stay: f64, channel: &ChannelTransition) -> Result<Self> {
        let (p_ib, p_bi) = (channel.p_ib, channel.p_bi);
        let shifted = stay + p_bi - 1.0;
        let gap = (shifted * shifted + 4.0 * p_bi * p_ib).sqrt();
        let upper = (stay - p_bi + gap + 1.0) / 2.0;
        let lower = (stay - p_bi - gap + 1.0) / 2.0;
        let bound = 1.0 - 8.0 * f64::EPSILON;
        if !(upper.abs() < bound && lower.abs() < bound) || gap == 0.0 {
            return Err(Error::TailDivergence { upper, lower });
        }
        Ok(SpectralConstants {
            stay,
            p_ib,
            p_bi,
            gap,
            upper,
            lower,
            upper_ratio: (stay + p_bi + gap - 1.0) / (2.0 * p_bi),
            lower_ratio: (stay + p_bi - gap - 1.0) / (2.0 * p_bi),
        })
    }

    // Coefficients of upper^k and lower^k in the idle component.
    fn modes(&self, entry: (f64, f64)) -> (f64, f64) {
        let scale = self.p_bi / self.gap;
        let up = scale * (self.upper_ratio * entry.0 + entry.1);
        let low = scale * (self.lower_ratio * entry.0 + entry.1);
        (up, low)
    }

    /// Row vector after `k` steps of the recursion from `entry`.
    pub fn propagate(&self, entry: (f64, f64), k: u32) -> (f64, f64) {
        let (up, low) = self.modes(entry);
        let bk = self.upper.powf(f64::from(k));
        let dk = self.lower.powf(f64::from(k));
        (
            up * bk - low * dk,
            -self.lower_ratio * up * bk + self.upper_ratio * low * dk,
        )
    }

    /// Exact geometric sums over `k = 0, 1, 2, ...` starting from `entry`.
    pub fn tail_sums(&self, entry: (f64, f64)) -> TailSums {
        let (up, low) = self.modes(entry);
        let (b, d) = (self.upper, self.lower);
        let mass_b = 1.0 / (1.0 - b);
        let mass_d = 1.0 / (1.0 - d);
        let mom_b = b / ((1.0 - b) * (1.0 - b));
        let mom_d = d / ((1.0 - d) * (1.0 - d));
        TailSums {
            idle: up * mass_b - low * mass_d,
            busy: -self.lower_ratio * up * mass_b + self.upper_ratio * low * mass_d,
            idle_moment: up * mom_b - low * mom_d,
            busy_moment: -self.lower_ratio * up * mom_b + self.upper_ratio * low * mom_d,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{slot_transition_matrix, PuRates};

    fn setup() -> (SpectralConstants, ChannelTransition) {
        let ch = slot_transition_matrix(&PuRates::new(0.02, 0.4).unwrap());
        let stay = ch.p_ii - 0.8 * (-0.02f64).exp();
        (SpectralConstants::new(stay, &ch).unwrap(), ch)
    }

    #[test]
    fn propagation_matches_matrix_product() {
        let (sc, ch) = setup();
        let entry = (0.3, 0.07);
        let mut row = entry;
        for k in 0..40 {
            let closed = sc.propagate(entry, k);
            assert!((closed.0 - row.0).abs() < 1e-14, "k={k}");
            assert!((closed.1 - row.1).abs() < 1e-14, "k={k}");
            row = (row.0 * sc.stay + row.1 * ch.p_bi, row.0 * ch.p_ib + row.1 * ch.p_bb);
        }
    }

    #[test]
    fn tail_sums_match_long_sum() {
        let (sc, _) = setup();
        let entry = (0.3, 0.07);
        let mut acc = [0.0; 4];
        for k in 0..5000 {
            let (i, b) = sc.propagate(entry, k);
            acc[0] += i;
            acc[1] += b;
            acc[2] += k as f64 * i;
            acc[3] += k as f64 * b;
        }
        let t = sc.tail_sums(entry);
        for (x, y) in acc.iter().zip([t.idle, t.busy, t.idle_moment, t.busy_moment]) {
            assert!((x - y).abs() < 1e-12 * y.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn non_contracting_matrix_is_an_error() {
        let ch = slot_transition_matrix(&PuRates::new(0.02, 0.4).unwrap());
        // stay = p_ii means nothing ever leaves: dominant eigenvalue 1
        let err = SpectralConstants::new(ch.p_ii, &ch).unwrap_err();
        assert!(matches!(err, Error::TailDivergence { .. }));
    }
}
