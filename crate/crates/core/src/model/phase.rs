use std::f64::consts::PI;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Reduces an angle to the half-open interval (−π, π].
///
/// Values already inside the interval are returned untouched, and −π maps to π.
pub fn wrap_phase(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::Domain(format!(
            "cannot wrap non-finite phase {theta}"
        )));
    }
    Ok(wrap_phase_unchecked(theta))
}

/// [`wrap_phase`] without the finiteness check; NaN propagates.
#[inline]
pub fn wrap_phase_unchecked(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    if theta == -PI {
        return PI;
    }
    let r = theta.rem_euclid(TWO_PI);
    // r - TWO_PI is exact for r in (π, 2π], so the result never reaches −π.
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// Removes 2π jumps from a sequence of wrapped phases. The first sample is
/// kept as is and each later sample is placed within π of its predecessor.
pub fn unwrap_phase(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut iter = wrapped.iter();
    if let Some(&first) = iter.next() {
        out.push(first);
        let mut prev_in = first;
        let mut prev_out = first;
        for &x in iter {
            prev_out += wrap_phase_unchecked(x - prev_in);
            prev_in = x;
            out.push(prev_out);
        }
    }
    out
}
