//! Monte Carlo critical values, power studies and the matched-sample-size
//! efficiency check.
//!
//! Replications run in pairs: one circulant FFT yields two independent fGn
//! paths, and pair p is seeded by `derive_seed(base, cell ++ [p])`. Results
//! are collected in replication order, so every estimate is a deterministic
//! function of its configuration regardless of the rayon pool size.

mod diagnostic;
mod power;
mod quantile;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fgn::{FgnGenerator, LrdSpec};
use crate::hermite::{compute_summary, HermiteSummary, QuadratureConfig};
use crate::rng::GaussianStream;
use crate::stats::{self, Method, Mode, Normalization, Series, Sidedness};
use crate::transform::{shift_in_place, Transform};

pub use diagnostic::{PsiCurve, PsiPoint};
pub use power::{
    matched_are_study, run_power_study, Calibration, MatchedConfig, MatchedRow, MatchedShift, MatchedStudy, PowerCell,
    PowerStudyConfig, PowerTable,
};
pub use quantile::{
    asymptotic_quantile, bridge_suprema, finite_sample_quantile, nested_bridge_suprema, null_statistics,
    upper_quantile, upper_quantile_index, QuantileEntry, QuantileKey, QuantileTable, SampleSize, QUANTILE_SCHEMA,
};

/// Which Hermite scale divides the statistic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleConvention {
    /// |a₁| for CUSUM, |∫J₁ dF| for Wilcoxon: the null limit is the bridge supremum.
    Hermite,
    /// Scale 1: the statistic is the path extremum over n·d_n.
    Unit,
}

impl ScaleConvention {
    pub fn name(&self) -> &'static str {
        match self {
            ScaleConvention::Hermite => "hermite",
            ScaleConvention::Unit => "unit",
        }
    }
}

impl std::str::FromStr for ScaleConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hermite" => Ok(ScaleConvention::Hermite),
            "unit" => Ok(ScaleConvention::Unit),
            other => Err(Error::Parse(format!("unknown scale convention '{other}'"))),
        }
    }
}

/// Data model and statistic convention shared by every replication of a cell.
#[derive(Clone, Debug)]
pub struct Design {
    n: usize,
    mode: Mode,
    transform: Transform,
    summary: HermiteSummary,
    sidedness: Sidedness,
    scale: ScaleConvention,
    dn_exact: bool,
}

impl Design {
    /// fGn noise with Hurst index `hurst`, mapped through `transform`.
    pub fn lrd(n: usize, hurst: f64, transform: Transform) -> Result<Self> {
        Self::new(n, Mode::Lrd(LrdSpec::new(hurst)?), transform)
    }

    /// i.i.d. standard normal noise mapped through `transform`.
    pub fn iid(n: usize, transform: Transform) -> Result<Self> {
        Self::new(n, Mode::Iid, transform)
    }

    /// Two-sided statistic, Hermite scale and asymptotic d_n by default.
    pub fn new(n: usize, mode: Mode, transform: Transform) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidLength(format!("n must be ≥ 2; got {n}")));
        }
        let summary = compute_summary(&transform, &QuadratureConfig::default())?;
        Ok(Self {
            n,
            mode,
            transform,
            summary,
            sidedness: Sidedness::TwoSided,
            scale: ScaleConvention::Hermite,
            dn_exact: false,
        })
    }

    pub fn with_sidedness(mut self, sidedness: Sidedness) -> Self {
        self.sidedness = sidedness;
        self
    }

    pub fn with_scale(mut self, scale: ScaleConvention) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_exact_dn(mut self, exact: bool) -> Self {
        self.dn_exact = exact;
        self
    }

    /// Same data model and conventions at another sample size.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidLength(format!("n must be ≥ 2; got {n}")));
        }
        Ok(Self { n, ..self.clone() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// H of the noise; 1/2 in i.i.d. mode.
    pub fn hurst(&self) -> f64 {
        match self.mode {
            Mode::Lrd(spec) => spec.hurst(),
            Mode::Iid => 0.5,
        }
    }

    /// D entering h = c·n^{−D/2}; 1 in i.i.d. mode.
    pub fn d(&self) -> f64 {
        match self.mode {
            Mode::Lrd(spec) => spec.d(),
            Mode::Iid => 1.0,
        }
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn summary(&self) -> &HermiteSummary {
        &self.summary
    }

    pub fn sidedness(&self) -> Sidedness {
        self.sidedness
    }

    pub fn scale(&self) -> ScaleConvention {
        self.scale
    }

    /// Normalization of `method` under this design. i.i.d. mode ignores the
    /// scale convention.
    pub fn normalization(&self, method: Method) -> Result<Normalization> {
        match self.mode {
            Mode::Iid => Normalization::iid(method, self.n),
            Mode::Lrd(spec) => {
                let scale = match self.scale {
                    ScaleConvention::Hermite => self.summary.scale_for(method),
                    ScaleConvention::Unit => 1.0,
                };
                Normalization::lrd(method, self.n, spec, scale, self.dn_exact)
            }
        }
    }
}

/// Draws noise pairs mapped through the design's transform.
#[derive(Clone, Debug)]
pub(crate) struct Sampler {
    n: usize,
    transform: Transform,
    generator: Option<FgnGenerator<f64>>,
}

/// Per-thread buffers.
pub(crate) struct Scratch {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    fft: Vec<Complex<f64>>,
}

impl Sampler {
    pub fn new(design: &Design) -> Result<Self> {
        Self::for_model(design.n, design.mode, design.transform.clone())
    }

    pub fn for_model(n: usize, mode: Mode, transform: Transform) -> Result<Self> {
        let generator = match mode {
            Mode::Lrd(spec) => Some(FgnGenerator::new(n, spec.hurst())?),
            Mode::Iid => None,
        };
        Ok(Self {
            n,
            transform,
            generator,
        })
    }

    /// Raw fGn with Hurst index `hurst` (no transform); H = 1/2 is white noise.
    pub fn fgn(n: usize, hurst: f64) -> Result<Self> {
        Ok(Self {
            n,
            transform: Transform::gaussian(),
            generator: Some(FgnGenerator::new(n, hurst)?),
        })
    }

    pub fn scratch(&self) -> Scratch {
        let fft_len = self.generator.as_ref().map_or(0, |g| g.embedding_size());
        Scratch {
            first: vec![0.0; self.n],
            second: vec![0.0; self.n],
            fft: Vec::with_capacity(fft_len),
        }
    }

    /// Fills `scratch.first` and `scratch.second` with two independent samples.
    pub fn pair(&self, seed: u64, scratch: &mut Scratch) {
        match &self.generator {
            Some(g) => g.sample_pair_into(seed, &mut scratch.first, &mut scratch.second, &mut scratch.fft),
            None => {
                let mut gauss = GaussianStream::from_seed(seed);
                gauss.fill(&mut scratch.first);
                gauss.fill(&mut scratch.second);
            }
        }
        self.transform.apply_in_place(&mut scratch.first);
        self.transform.apply_in_place(&mut scratch.second);
    }
}

/// Runs `reps` replications in pairs and returns their results in order.
///
/// `eval` sees one sample at a time; pair p uses seed `seed_of(p)`.
pub(crate) fn replicate<R, S, E>(sampler: &Sampler, reps: usize, seed_of: S, eval: E) -> Vec<R>
where
    R: Send,
    S: Fn(u64) -> u64 + Sync,
    E: Fn(&mut [f64]) -> R + Sync,
{
    let pairs = reps.div_ceil(2);
    let mut out: Vec<R> = (0..pairs)
        .into_par_iter()
        .map_init(
            || sampler.scratch(),
            |scratch, p| {
                sampler.pair(seed_of(p as u64), scratch);
                let a = eval(&mut scratch.first);
                let b = if 2 * p + 1 < reps {
                    Some(eval(&mut scratch.second))
                } else {
                    None
                };
                (a, b)
            },
        )
        .collect::<Vec<_>>()
        .into_iter()
        .flat_map(|(a, b)| std::iter::once(a).chain(b))
        .collect();
    out.truncate(reps);
    out
}

/// Normalized statistic of a sample under a prepared normalization.
pub(crate) fn evaluate(
    values: &[f64],
    method: Method,
    sidedness: Sidedness,
    norm: &Normalization,
) -> Result<(f64, usize)> {
    let series = Series::new(values.to_vec())?;
    let (extremum, argmax) = match method {
        Method::Cusum => stats::path_extremum(&stats::cusum_path(&series), sidedness),
        Method::Wilcoxon => {
            let doubled = stats::wilcoxon_path_doubled(&series);
            let (v, k) = stats::path_extremum(&doubled.iter().map(|&d| d as f64).collect::<Vec<_>>(), sidedness);
            (0.5 * v, k)
        }
    };
    let value = extremum / norm.denominator();
    if !value.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite {} statistic",
            method.name()
        )));
    }
    Ok((value, argmax))
}

/// Adds the level shift of `tau`, `h` and evaluates every method on the same sample.
pub(crate) fn evaluate_methods(
    values: &mut [f64],
    tau: f64,
    h: f64,
    methods: &[(Method, Normalization)],
    sidedness: Sidedness,
) -> Result<Vec<f64>> {
    shift_in_place(values, tau, h);
    methods
        .iter()
        .map(|(m, norm)| evaluate(values, *m, sidedness, norm).map(|(v, _)| v))
        .collect()
}

/// Encodes a float coordinate for seed derivation.
pub(crate) fn coord(x: f64) -> u64 {
    x.to_bits()
}
