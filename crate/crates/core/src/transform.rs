//! Instantaneous transforms X = G(ξ) and level-shift injection.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fgn::NoisePath;
use crate::normal;
use crate::quadrature::{self, AdaptiveConfig};
use crate::scalar::Scalar;
use crate::stats::Series;

/// √(3/4), the standard deviation of Pareto(3, 1).
pub const PARETO31_SD: f64 = 0.866_025_403_784_438_6;
/// Left end of the standardized Pareto(3, 1) support, −√(1/3).
pub const PARETO31_LOWER: f64 = -0.577_350_269_189_625_8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Gaussian,
    Pareto31,
    Custom,
}

/// Direction of the strictly monotone G.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

impl Monotonicity {
    pub fn sign(&self) -> f64 {
        match self {
            Monotonicity::Increasing => 1.0,
            Monotonicity::Decreasing => -1.0,
        }
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A strictly monotone G with the CDF F and density f of G(ξ), ξ ~ N(0, 1).
#[derive(Clone)]
pub struct Transform {
    kind: TransformKind,
    name: String,
    g: RealFn,
    cdf: RealFn,
    density: RealFn,
    support: (f64, f64),
    monotonicity: Monotonicity,
}

impl fmt::Debug for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Transform")
            .field("kind", &self.kind)
            .field("name", &self.name)
            .field("support", &self.support)
            .field("monotonicity", &self.monotonicity)
            .finish()
    }
}

/// Moments of G(ξ) under ξ ~ N(0, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentCheck {
    pub mean: f64,
    pub second_moment: f64,
}

impl Transform {
    /// G(t) = t.
    pub fn gaussian() -> Self {
        Self {
            kind: TransformKind::Gaussian,
            name: "gaussian".into(),
            g: Arc::new(|t| t),
            cdf: Arc::new(normal::cdf),
            density: Arc::new(normal::pdf),
            support: (f64::NEG_INFINITY, f64::INFINITY),
            monotonicity: Monotonicity::Increasing,
        }
    }

    /// G(t) = (Φ(t)^{−1/3} − 3/2)/√(3/4): standardized Pareto(3, 1) margins.
    ///
    /// G is strictly decreasing, so F(G(t)) = 1 − Φ(t) and a₁ < 0.
    pub fn pareto31() -> Self {
        Self {
            kind: TransformKind::Pareto31,
            name: "pareto31".into(),
            g: Arc::new(pareto31_g),
            cdf: Arc::new(pareto31_cdf),
            density: Arc::new(pareto_density),
            support: (PARETO31_LOWER, f64::INFINITY),
            monotonicity: Monotonicity::Decreasing,
        }
    }

    /// A user-supplied (G, F, f) triple.
    pub fn custom<G, F, D>(
        name: impl Into<String>,
        g: G,
        cdf: F,
        density: D,
        support: (f64, f64),
        monotonicity: Monotonicity,
    ) -> Result<Self>
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(support.0 < support.1) {
            return Err(Error::InvalidParameter(format!("empty support {support:?}")));
        }
        Ok(Self {
            kind: TransformKind::Custom,
            name: name.into(),
            g: Arc::new(g),
            cdf: Arc::new(cdf),
            density: Arc::new(density),
            support,
            monotonicity,
        })
    }

    /// Looks up a built-in transform by name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Self::gaussian()),
            "pareto31" | "pareto" => Ok(Self::pareto31()),
            other => Err(Error::Parse(format!("unknown transform '{other}'"))),
        }
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    #[inline]
    pub fn g(&self, t: f64) -> f64 {
        (self.g)(t)
    }

    #[inline]
    pub fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    #[inline]
    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    /// Applies G in place to a slice of noise values.
    pub fn apply_in_place<T: Scalar>(&self, values: &mut [T]) {
        if self.kind == TransformKind::Gaussian {
            return;
        }
        for v in values.iter_mut() {
            *v = T::from_f64_lossy(self.g(v.to_f64_lossy()));
        }
    }

    /// Computes E[G(ξ)] and E[G²(ξ)] by quadrature and checks them against
    /// (0, 1) within `tol`.
    pub fn check_moments(&self, cfg: &AdaptiveConfig, tol: f64) -> Result<MomentCheck> {
        let weighted = |p: i32| {
            move |x: f64| {
                let w = normal::pdf(x);
                if w == 0.0 {
                    0.0
                } else {
                    self.g(x).powi(p) * w
                }
            }
        };
        let inf = f64::INFINITY;
        let mean = quadrature::integrate(weighted(1), -inf, inf, cfg)?.value;
        let second_moment = quadrature::integrate(weighted(2), -inf, inf, cfg)?.value;
        let check = MomentCheck { mean, second_moment };
        if mean.abs() > tol || (second_moment - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "transform '{}' is not standardized: E[G] = {mean}, E[G²] = {second_moment}",
                self.name
            )));
        }
        Ok(check)
    }
}

fn pareto31_g(t: f64) -> f64 {
    (normal::cdf(t).powf(-1.0 / 3.0) - 1.5) / PARETO31_SD
}

fn pareto31_cdf(x: f64) -> f64 {
    if x <= PARETO31_LOWER {
        return 0.0;
    }
    1.0 - (PARETO31_SD * x + 1.5).powi(-3)
}

/// Density 3√(3/4)(√(3/4)x + 3/2)^{−4} on x ≥ −√(1/3), zero elsewhere.
pub fn pareto_density(x: f64) -> f64 {
    if x < PARETO31_LOWER {
        return 0.0;
    }
    3.0 * PARETO31_SD * (PARETO31_SD * x + 1.5).powi(-4)
}

/// Elementwise X_i = G(ξ_i).
pub fn apply_transform<T: Scalar>(noise: &NoisePath<T>, t: &Transform) -> Result<Series<T>> {
    let mut values = noise.values().to_vec();
    t.apply_in_place(&mut values);
    Series::new(values)
}

/// Level shift specification: an absolute h, or a constant c with h = c·n^{−D/2}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shift {
    Absolute(f64),
    Constant(f64),
}

/// Alternative A_{τ,h}: the mean moves by h after index ⌊nτ⌋.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangeSpec {
    tau: f64,
    shift: Shift,
}

impl ChangeSpec {
    pub fn new(tau: f64, shift: Shift) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::InvalidParameter(format!("tau must lie in [0, 1]; got {tau}")));
        }
        let v = match shift {
            Shift::Absolute(h) => h,
            Shift::Constant(c) => c,
        };
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("shift must be finite; got {v}")));
        }
        Ok(Self { tau, shift })
    }

    pub fn absolute(tau: f64, h: f64) -> Result<Self> {
        Self::new(tau, Shift::Absolute(h))
    }

    pub fn null() -> Self {
        Self {
            tau: 1.0,
            shift: Shift::Absolute(0.0),
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn shift(&self) -> Shift {
        self.shift
    }

    /// Absolute shift at sample size n; `d` is D (use D = 1 for h = c/√n).
    pub fn resolve_shift(&self, n: usize, d: f64) -> f64 {
        match self.shift {
            Shift::Absolute(h) => h,
            Shift::Constant(c) => c * (n as f64).powf(-d / 2.0),
        }
    }
}

/// Last pre-break index ⌊nτ⌋ (the product is nudged by 1e−9 so decimal τ
/// such as 0.29 with n = 100 gives 29, not 28).
pub fn break_index(n: usize, tau: f64) -> usize {
    ((n as f64 * tau + 1e-9).floor() as usize).min(n)
}

/// Adds h to every value after index ⌊nτ⌋.
pub fn shift_in_place<T: Scalar>(values: &mut [T], tau: f64, h: f64) {
    if h == 0.0 {
        return;
    }
    let start = break_index(values.len(), tau);
    let h = T::from_f64_lossy(h);
    for v in &mut values[start..] {
        *v += h;
    }
}

/// X_i unchanged for i ≤ ⌊nτ⌋ and X_i + h afterwards; h resolved with D = `d`.
pub fn inject_shift<T: Scalar>(series: &Series<T>, change: &ChangeSpec, d: f64) -> Result<Series<T>> {
    let mut values = series.values().to_vec();
    let h = change.resolve_shift(values.len(), d);
    shift_in_place(&mut values, change.tau, h);
    Series::new(values)
}
