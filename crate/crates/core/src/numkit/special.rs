use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Log-density of a Gamma distribution in the shape/rate parametrization.
pub fn gamma_logpdf(x: f64, shape: f64, rate: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::DomainError(format!("gamma_logpdf at x = {x}")));
    }
    if !(shape > 0.0) || !(rate > 0.0) {
        return Err(Error::DomainError(format!("gamma_logpdf with shape {shape}, rate {rate}")));
    }
    Ok(shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile; `u` is clamped away from 0 and 1.
pub fn normal_quantile(u: f64) -> f64 {
    let u = u.clamp(1e-12, 1.0 - 1e-12);
    Normal::standard().inverse_cdf(u)
}
