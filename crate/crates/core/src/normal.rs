//! Standard normal density, distribution and quantile functions.
//!
//! `cdf` is `erfc(-x/√2)/2` with the fdlibm erfc. `quantile` starts from
//! `erfc_inv` and takes one Halley step against `cdf`.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use libm::erfc;
use statrs::function::erf::erfc_inv;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF Φ(x).
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail 1 − Φ(x), accurate for large positive x.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal quantile Φ⁻¹(p) for p in (0, 1); ±∞ at the endpoints.
pub fn quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    // Halley refinement on the tail that keeps the residual well conditioned.
    let residual = if x < 0.0 { cdf(x) - p } else { (1.0 - p) - sf(x) };
    let d = pdf(x);
    if d == 0.0 || !residual.is_finite() {
        return x;
    }
    let u = residual / d;
    x - u / (1.0 + 0.5 * x * u)
}
