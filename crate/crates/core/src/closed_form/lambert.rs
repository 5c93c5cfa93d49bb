//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::{Error, Result};

const MAX_ITER: usize = 64;

/// Principal branch `W0(x)`: the solution `w >= -1` of `w * exp(w) = x`.
///
/// Halley iteration from a branch-point series near `-1/e`, `ln(1 + x)` for
/// moderate arguments, and the asymptotic `ln x - ln ln x` for large ones.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch - 1e-15 {
        return Err(Error::LambertDomain(x));
    }
    if !x.is_finite() {
        return Err(Error::LambertConvergence(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x <= branch {
        return Ok(-1.0);
    }

    let mut w = initial_guess(x);
    let tol = 1e-12 * x.abs().max(1.0);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() < tol * 1e-3 {
            return Ok(w);
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let d1 = ew * wp1;
        let step = f / (d1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs()) {
            w = next;
            break;
        }
        w = next;
    }
    if (w * w.exp() - x).abs() < tol {
        Ok(w)
    } else {
        Err(Error::LambertConvergence(x))
    }
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.25 {
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}
