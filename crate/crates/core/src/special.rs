//! Gamma function, Euler's constant and the standard normal distribution.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{invalid, Result};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}

/// `Gamma(rho)` for `rho > 0`.
pub fn gamma_real(rho: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return invalid(format!("Gamma is evaluated for rho > 0, got {rho}"));
    }
    Ok(libm::tgamma(rho))
}

/// `log Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Standard normal distribution function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `log(m!)`.
pub fn ln_factorial(m: u64) -> f64 {
    if m < 2 {
        0.0
    } else {
        ln_gamma(m as f64 + 1.0)
    }
}
