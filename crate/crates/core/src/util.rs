//! Scalar helpers shared across modules.

use core::f64::consts::TAU;
use num_traits::Float;

/// Below this magnitude `|x|^a` is taken as exactly zero.
pub(crate) const POW_FLOOR: f64 = 1e-300;

/// Sign function with `sign(0) = 0`.
#[inline]
pub fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `|x|^a` evaluated as `exp(a ln|x|)`, zero for `|x| < 1e-300`.
#[inline]
pub fn abs_pow(x: f64, a: f64) -> f64 {
    let m = x.abs();
    if m < POW_FLOOR {
        0.0
    } else {
        Float::exp(a * Float::ln(m))
    }
}

/// `sign(x)|x|^a`.
#[inline]
pub fn signed_pow(x: f64, a: f64) -> f64 {
    sign0(x) * abs_pow(x, a)
}

/// Reduce an angle to `[0, 2π)`.
#[inline]
pub fn wrap_tau(x: f64) -> f64 {
    let r = x - TAU * Float::floor(x / TAU);
    // r can round up to exactly TAU for tiny negative x
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(sign0(0.0), 0.0);
        assert_eq!(sign0(-0.0), 0.0);
        assert_eq!(sign0(-3.0), -1.0);
    }

    #[test]
    fn fractional_power_guard() {
        assert_eq!(abs_pow(1e-320, 2.0 / 3.0), 0.0);
        assert!((signed_pow(-0.125, 2.0 / 3.0) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_tau(0.0), 0.0);
        assert!(wrap_tau(-1e-18) < TAU);
        assert!((wrap_tau(-core::f64::consts::FRAC_PI_2) - 1.5 * core::f64::consts::PI).abs() < 1e-15);
    }
}
