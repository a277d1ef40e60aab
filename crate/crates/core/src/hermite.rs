//! Hermite coefficients, the density integral ∫f², and ARE constants.
//!
//! For a strictly monotone G the first Hermite coefficient of the indicator
//! class satisfies |∫J₁ dF| = 1/(2√π), so the shift ratio
//! |a₁|·∫f² / |∫J₁ dF| and the LRD efficiency (shift ratio)^{2/D} need only
//! a₁ = E[ξ·G(ξ)] and ∫f² from quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::quadrature::{self, AdaptiveConfig, GaussHermite};
use crate::stats::{Method, IID_WILCOXON_SIGMA};
use crate::transform::Transform;

/// 1/(2√π).
pub const INV_TWO_SQRT_PI: f64 = 0.282_094_791_773_878_14;

pub const MAX_HERMITE_ORDER: usize = 10;

/// Probabilists' Hermite polynomial He_q(x), q ≤ 10.
pub fn hermite_poly(q: usize, x: f64) -> Result<f64> {
    if q > MAX_HERMITE_ORDER {
        return Err(Error::UnsupportedOrder(q));
    }
    let (mut prev, mut cur) = (1.0, x);
    if q == 0 {
        return Ok(prev);
    }
    for k in 1..q {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Quadrature settings for [`compute_summary`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub adaptive: AdaptiveConfig,
    /// Node count of the Gauss–Hermite cross-check.
    pub hermite_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            adaptive: AdaptiveConfig {
                abs_tol: 1e-12,
                rel_tol: 1e-12,
                max_intervals: 5000,
            },
            hermite_nodes: 201,
        }
    }
}

impl QuadratureConfig {
    /// The same rule with tighter tolerances and a doubled node count.
    pub fn refined(&self) -> Self {
        Self {
            adaptive: AdaptiveConfig {
                abs_tol: self.adaptive.abs_tol / 16.0,
                rel_tol: self.adaptive.rel_tol / 16.0,
                max_intervals: self.adaptive.max_intervals * 2,
            },
            hermite_nodes: self.hermite_nodes * 2,
        }
    }
}

/// Hermite data of a transform entering the normalizations and the ARE.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteSummary {
    pub transform: String,
    pub a1: f64,
    pub j1_integral: f64,
    pub f_sq_integral: f64,
    pub shift_ratio: f64,
    /// Quadrature error estimates of a₁ and ∫f².
    pub a1_error: f64,
    pub f_sq_error: f64,
}

impl HermiteSummary {
    /// Scale dividing the method's statistic: |a₁| or |∫J₁ dF|.
    pub fn scale_for(&self, method: Method) -> f64 {
        match method {
            Method::Cusum => self.a1.abs(),
            Method::Wilcoxon => self.j1_integral.abs(),
        }
    }
}

/// a_q = E[H_q(ξ)·G(ξ)] by adaptive quadrature on ℝ.
pub fn hermite_coefficient(t: &Transform, q: usize, cfg: &AdaptiveConfig) -> Result<quadrature::Integral> {
    hermite_poly(q, 0.0)?;
    quadrature::integrate(
        |x| {
            let w = normal::pdf(x);
            if w == 0.0 {
                return 0.0;
            }
            let h = hermite_poly(q, x).unwrap_or(f64::NAN);
            t.g(x) * h * w
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        cfg,
    )
}

/// a_q by an n-point Gauss–Hermite rule; exact for polynomial G of low degree.
pub fn hermite_coefficient_gauss_hermite(t: &Transform, q: usize, nodes: usize) -> Result<f64> {
    hermite_poly(q, 0.0)?;
    let rule = GaussHermite::new(nodes)?;
    Ok(rule.expectation(|x| t.g(x) * hermite_poly(q, x).unwrap_or(f64::NAN)))
}

/// ∫ f²(x) dx over the support of the transform.
pub fn density_square_integral(t: &Transform, cfg: &AdaptiveConfig) -> Result<quadrature::Integral> {
    let (lo, hi) = t.support();
    quadrature::integrate(
        |x| {
            let f = t.density(x);
            f * f
        },
        lo,
        hi,
        cfg,
    )
}

/// Computes a₁, ∫f² and the shift ratio for a transform.
pub fn compute_summary(t: &Transform, cfg: &QuadratureConfig) -> Result<HermiteSummary> {
    let a1 = hermite_coefficient(t, 1, &cfg.adaptive)?;
    let f_sq = density_square_integral(t, &cfg.adaptive)?;
    if a1.value.signum() != t.monotonicity().sign() {
        return Err(Error::InvalidParameter(format!(
            "a₁ = {} has the wrong sign for a {:?} transform",
            a1.value,
            t.monotonicity()
        )));
    }
    // ∫J₁ dF = −1/(2√π) for increasing G; the sign flips for decreasing G.
    let j1_integral = -t.monotonicity().sign() * INV_TWO_SQRT_PI;
    Ok(HermiteSummary {
        transform: t.name().to_string(),
        a1: a1.value,
        j1_integral,
        f_sq_integral: f_sq.value,
        shift_ratio: a1.value.abs() * f_sq.value / j1_integral.abs(),
        a1_error: a1.error,
        f_sq_error: f_sq.error,
    })
}

/// Recomputes a summary at refined settings and fails if a₁ or ∫f² move by more than `tol`.
pub fn compute_summary_checked(t: &Transform, cfg: &QuadratureConfig, tol: f64) -> Result<HermiteSummary> {
    let coarse = compute_summary(t, cfg)?;
    let fine = compute_summary(t, &cfg.refined())?;
    let da = (coarse.a1 - fine.a1).abs();
    let df = (coarse.f_sq_integral - fine.f_sq_integral).abs();
    if da > tol || df > tol {
        return Err(Error::QuadratureNonConvergence(format!(
            "refinement changed a₁ by {da:e} and ∫f² by {df:e} (tol {tol:e})"
        )));
    }
    Ok(fine)
}

/// ∫J₁ dF evaluated as a double integral, J₁(x) = E[ξ·1{G(ξ) ≤ x}].
///
/// Diagnostic route; the summary uses the closed form.
pub fn j1_integral_by_quadrature(t: &Transform, cfg: &AdaptiveConfig) -> Result<f64> {
    let inner_cfg = AdaptiveConfig {
        abs_tol: cfg.abs_tol.max(1e-11),
        rel_tol: cfg.rel_tol.max(1e-11),
        max_intervals: cfg.max_intervals,
    };
    // ∫ J₁(G(s)) φ(s) ds; the indicator region {y : G(y) ≤ G(s)} is found
    // from ordering alone, so the inner integral splits at s.
    let inner = |s: f64| -> f64 {
        let gs = t.g(s);
        let integrand = |y: f64| {
            let w = normal::pdf(y);
            if w != 0.0 && t.g(y) <= gs {
                y * w
            } else {
                0.0
            }
        };
        let left = quadrature::integrate(integrand, f64::NEG_INFINITY, s, &inner_cfg);
        let right = quadrature::integrate(integrand, s, f64::INFINITY, &inner_cfg);
        match (left, right) {
            (Ok(l), Ok(r)) => l.value + r.value,
            _ => f64::NAN,
        }
    };
    let outer = quadrature::integrate(
        |s| {
            let w = normal::pdf(s);
            if w == 0.0 {
                0.0
            } else {
                inner(s) * w
            }
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        &AdaptiveConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_intervals: cfg.max_intervals,
        },
    )?;
    Ok(outer.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AreRegime {
    Lrd { d: f64 },
    Iid,
}

/// ARE of the Wilcoxon test relative to CUSUM, with b = 1/ARE the factor
/// n_W = b·n_C needed for equal power.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreResult {
    pub regime: AreRegime,
    pub value: f64,
    pub b: f64,
}

/// (shift ratio)^{2/D}.
pub fn are_lrd(summary: &HermiteSummary, d: f64) -> Result<AreResult> {
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::InvalidParameter(format!("D must lie in (0, 1); got {d}")));
    }
    let exponent = 2.0 / d;
    Ok(AreResult {
        regime: AreRegime::Lrd { d },
        value: summary.shift_ratio.powf(exponent),
        b: summary.shift_ratio.powf(-exponent),
    })
}

/// (2σ√π)^{−2} = 3/π with σ² = 1/12 (i.i.d. Gaussian data).
pub fn are_iid() -> AreResult {
    let s = 2.0 * IID_WILCOXON_SIGMA * std::f64::consts::PI.sqrt();
    let value = s.powi(-2);
    AreResult {
        regime: AreRegime::Iid,
        value,
        b: s * s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::Monotonicity;

    #[test]
    fn hermite_recurrence() {
        assert_eq!(hermite_poly(0, 3.7).unwrap(), 1.0);
        assert_eq!(hermite_poly(1, 3.7).unwrap(), 3.7);
        assert_eq!(hermite_poly(2, 3.0).unwrap(), 8.0);
        // He_3 = x³ − 3x, He_4 = x⁴ − 6x² + 3.
        assert_eq!(hermite_poly(3, 2.0).unwrap(), 2.0);
        assert_eq!(hermite_poly(4, 2.0).unwrap(), -5.0);
        assert!(matches!(hermite_poly(11, 1.0), Err(Error::UnsupportedOrder(11))));
        assert!(hermite_poly(10, 1.0).is_ok());
    }

    #[test]
    fn hermite_orthogonality() {
        let cfg = AdaptiveConfig::default();
        for (p, q) in [(2, 0), (2, 1), (3, 1), (4, 2), (5, 3)] {
            let r = quadrature::integrate(
                |x| hermite_poly(p, x).unwrap() * hermite_poly(q, x).unwrap() * normal::pdf(x),
                f64::NEG_INFINITY,
                f64::INFINITY,
                &cfg,
            )
            .unwrap();
            assert!(r.value.abs() < 1e-10, "({p},{q}): {}", r.value);
        }
        // E[He_q²] = q!.
        let r = quadrature::integrate(
            |x| hermite_poly(4, x).unwrap().powi(2) * normal::pdf(x),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &cfg,
        )
        .unwrap();
        assert!((r.value - 24.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_summary_closed_forms() {
        let s = compute_summary(&Transform::gaussian(), &QuadratureConfig::default()).unwrap();
        assert!((s.a1 - 1.0).abs() < 1e-9);
        assert!((s.f_sq_integral - INV_TWO_SQRT_PI).abs() < 1e-9);
        assert!((s.j1_integral + INV_TWO_SQRT_PI).abs() < 1e-15);
        assert!((s.shift_ratio - 1.0).abs() < 1e-8);
        let gh = hermite_coefficient_gauss_hermite(&Transform::gaussian(), 1, 201).unwrap();
        assert!((gh - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pareto_summary() {
        let s = compute_summary(&Transform::pareto31(), &QuadratureConfig::default()).unwrap();
        assert!((s.a1 + 0.6784).abs() < 5e-4, "a1 = {}", s.a1);
        assert!((s.shift_ratio - 2.67754).abs() < 1e-3, "ratio = {}", s.shift_ratio);
        // ∫f² = 9√(3/4)/7 in closed form.
        assert!((s.f_sq_integral - 9.0 * 0.75f64.sqrt() / 7.0).abs() < 1e-10);
        assert!(s.j1_integral > 0.0);
    }

    #[test]
    fn refinement_is_stable() {
        for t in [Transform::gaussian(), Transform::pareto31()] {
            compute_summary_checked(&t, &QuadratureConfig::default(), 1e-7).unwrap();
        }
    }

    #[test]
    fn j1_double_integral_matches_closed_form() {
        let cfg = AdaptiveConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_intervals: 2000,
        };
        let g = j1_integral_by_quadrature(&Transform::gaussian(), &cfg).unwrap();
        assert!((g + INV_TWO_SQRT_PI).abs() < 1e-7, "{g}");
        let p = j1_integral_by_quadrature(&Transform::pareto31(), &cfg).unwrap();
        assert!((p - INV_TWO_SQRT_PI).abs() < 1e-7, "{p}");
    }

    #[test]
    fn wrong_sign_declaration_is_rejected() {
        let t = Transform::custom(
            "mislabelled",
            |x| x,
            normal::cdf,
            normal::pdf,
            (f64::NEG_INFINITY, f64::INFINITY),
            Monotonicity::Decreasing,
        )
        .unwrap();
        assert!(compute_summary(&t, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn are_values() {
        let g = compute_summary(&Transform::gaussian(), &QuadratureConfig::default()).unwrap();
        for d in [0.2, 0.6, 0.9] {
            assert!((are_lrd(&g, d).unwrap().value - 1.0).abs() < 1e-8);
        }
        let p = compute_summary(&Transform::pareto31(), &QuadratureConfig::default()).unwrap();
        let are = are_lrd(&p, 0.6).unwrap();
        assert!((are.value - 26.655).abs() < 0.1, "{}", are.value);
        assert!((are.value * are.b - 1.0).abs() < 1e-12);
        assert!(are_lrd(&p, 1.0).is_err());

        let iid = are_iid();
        assert!((iid.value - 3.0 / std::f64::consts::PI).abs() < 1e-15);
        assert!(iid.value < 1.0 && 1.0 < are.value);
    }

    #[test]
    fn are_increasing_in_shift_ratio() {
        let base = compute_summary(&Transform::gaussian(), &QuadratureConfig::default()).unwrap();
        let mut prev = 0.0;
        for i in 1..50 {
            let s = HermiteSummary {
                shift_ratio: 0.1 * i as f64,
                ..base.clone()
            };
            let v = are_lrd(&s, 0.6).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
        let unit = HermiteSummary {
            shift_ratio: 1.0,
            ..base
        };
        assert_eq!(are_lrd(&unit, 0.37).unwrap().value, 1.0);
    }
}
