//! The real growth model `F(t) = exp(t) - 1` and its inverse `ln(1 + u)`.
//!
//! Iterates of `F` are the yardstick for how fast points on a ray escape;
//! iterates of the inverse turn observed real parts back into potentials.

use crate::error::{Error, Result};

/// Default cap on `F^n(t)` before an iterate is reported as overflowing.
pub const DEFAULT_R_CAP: f64 = 1e100;

/// Largest argument for which `exp` stays finite in binary64.
pub(crate) const EXP_ARG_MAX: f64 = 709.0;

pub fn growth_f(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput("growth model is defined for t >= 0"));
    }
    let v = libm::expm1(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::OverflowDepth { level: 1 })
    }
}

/// `F^n(t)` with the default cap.
pub fn growth_f_iter(t: f64, n: usize) -> Result<f64> {
    growth_f_iter_capped(t, n, DEFAULT_R_CAP)
}

/// `F^n(t)`; the first iterate above `cap` is reported as `OverflowDepth`.
pub fn growth_f_iter_capped(t: f64, n: usize, cap: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput("growth model is defined for t >= 0"));
    }
    let mut v = t;
    for level in 1..=n {
        if v == 0.0 {
            break;
        }
        if v > EXP_ARG_MAX {
            return Err(Error::OverflowDepth { level });
        }
        v = libm::expm1(v);
        if v > cap {
            return Err(Error::OverflowDepth { level });
        }
    }
    Ok(v)
}

pub fn growth_f_inv(u: f64) -> f64 {
    libm::log1p(u)
}

/// n-fold `ln(1 + u)`.
pub fn growth_f_inv_iter(u: f64, n: usize) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::InvalidInput("inverse growth model is defined for u >= 0"));
    }
    let mut v = u;
    for _ in 0..n {
        if v == 0.0 {
            break;
        }
        v = libm::log1p(v);
    }
    Ok(v)
}

/// Orbit `t, F(t), F^2(t), ...` stopping before the first value above `cap`
/// or after `max_len` entries.
pub(crate) fn growth_levels(t: f64, max_len: usize, cap: f64) -> alloc::vec::Vec<f64> {
    let mut out = alloc::vec::Vec::new();
    let mut v = t;
    while out.len() < max_len {
        out.push(v);
        if v > EXP_ARG_MAX {
            break;
        }
        let next = libm::expm1(v);
        if !(next <= cap) {
            break;
        }
        v = next;
    }
    out
}

/// `ln(F(L)) = ln(exp(L) - 1)` without forming `exp(L)`.
pub(crate) fn ln_growth_f(l: f64) -> f64 {
    if l > 30.0 {
        l + libm::log1p(-libm::exp(-l))
    } else {
        libm::log(libm::expm1(l))
    }
}
