//! Change-point tests for long-range dependent series.
//!
//! The data path (noise generation, transforms, test statistics) is generic
//! over [`Scalar`] and works for `f32` and `f64`. Quadrature and Monte Carlo
//! drivers run in `f64`.

pub mod error;
pub mod fgn;
pub mod hermite;
pub mod io;
pub mod montecarlo;
pub mod normal;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use fgn::{fgn_autocovariance, generate_fgn, FgnGenerator, LrdSpec, NoisePath};
pub use hermite::{are_iid, are_lrd, compute_summary, AreResult, HermiteSummary, QuadratureConfig};
pub use scalar::Scalar;
pub use stats::{test_statistic, Method, Mode, Normalization, Series, Sidedness, TestReport};
pub use transform::{apply_transform, inject_shift, ChangeSpec, Monotonicity, Shift, Transform};

pub type Series64 = Series<f64>;
pub type Series32 = Series<f32>;
pub type NoisePath64 = NoisePath<f64>;
pub type NoisePath32 = NoisePath<f32>;
pub type TestReport64 = TestReport<f64>;
pub type TestReport32 = TestReport<f32>;
pub type FgnGenerator64 = FgnGenerator<f64>;
pub type FgnGenerator32 = FgnGenerator<f32>;
