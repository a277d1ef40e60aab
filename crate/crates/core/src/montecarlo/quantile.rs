//! Upper-α quantiles of the null distributions.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{coord, evaluate, replicate, Design, Sampler, ScaleConvention};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::stats::{Method, Sidedness};

/// Version tag written into every quantile table row.
pub const QUANTILE_SCHEMA: u32 = 1;

const MIN_GRID: usize = 1 << 10;
const MIN_REPS: usize = 1000;
const ESTIMATOR: &str = "order-statistic-ceil";

/// 1-based index ⌈(1−α)·reps⌉ of the upper-α order statistic, at least 1.
pub fn upper_quantile_index(alpha: f64, reps: usize) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1]; got {alpha}"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidParameter("quantile of an empty sample".into()));
    }
    // The slack keeps (1 − 0.05)·10⁴ at 9500 instead of 9501.
    let k = ((1.0 - alpha) * reps as f64 - 1e-9).ceil().max(1.0) as usize;
    Ok(k.min(reps))
}

/// Upper-α quantile: the ascending order statistic at ⌈(1−α)·reps⌉.
pub fn upper_quantile(sample: &[f64], alpha: f64) -> Result<f64> {
    let k = upper_quantile_index(alpha, sample.len())?;
    if sample.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("NaN in simulated sample".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted[k - 1])
}

fn bridge_sup(path: &[f64], stride: usize, scale: f64, sidedness: Sidedness) -> f64 {
    // path holds fGn increments; B(k/N) = scale·S_k.
    let n = path.len();
    let total: f64 = path.iter().sum();
    let mut partial = 0.0;
    let mut best = 0.0f64;
    for (i, &x) in path.iter().enumerate() {
        partial += x;
        let k = i + 1;
        if k % stride != 0 {
            continue;
        }
        let v = scale * (partial - k as f64 / n as f64 * total);
        let v = match sidedness {
            Sidedness::OneSided => v,
            Sidedness::TwoSided => v.abs(),
        };
        best = best.max(v);
    }
    best
}

fn check_bridge_args(hurst: f64, grid_n: usize, reps: usize) -> Result<()> {
    if grid_n < MIN_GRID {
        return Err(Error::InvalidParameter(format!(
            "grid_n must be ≥ {MIN_GRID}; got {grid_n}"
        )));
    }
    if reps < MIN_REPS {
        return Err(Error::InvalidParameter(format!(
            "reps must be ≥ {MIN_REPS}; got {reps}"
        )));
    }
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "hurst must lie in (0, 1); got {hurst}"
        )));
    }
    Ok(())
}

/// Suprema of B_H(λ) − λB_H(1) over the grid k/grid_n, k = 0..grid_n.
pub fn bridge_suprema(hurst: f64, grid_n: usize, reps: usize, seed: u64, sidedness: Sidedness) -> Result<Vec<f64>> {
    check_bridge_args(hurst, grid_n, reps)?;
    let sampler = Sampler::fgn(grid_n, hurst)?;
    let scale = (grid_n as f64).powf(-hurst);
    let base = derive_seed(seed, &[coord(hurst), grid_n as u64]);
    Ok(replicate(
        &sampler,
        reps,
        |p| derive_seed(base, &[p]),
        |x| bridge_sup(x, 1, scale, sidedness),
    ))
}

/// Suprema on the grid of size `grid_n` and on its even subgrid of size
/// grid_n/2, from the same paths.
pub fn nested_bridge_suprema(
    hurst: f64,
    grid_n: usize,
    reps: usize,
    seed: u64,
    sidedness: Sidedness,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_bridge_args(hurst, grid_n / 2, reps)?;
    if !grid_n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("grid_n must be even; got {grid_n}")));
    }
    let sampler = Sampler::fgn(grid_n, hurst)?;
    let scale = (grid_n as f64).powf(-hurst);
    let base = derive_seed(seed, &[coord(hurst), grid_n as u64, 2]);
    let pairs = replicate(
        &sampler,
        reps,
        |p| derive_seed(base, &[p]),
        |x| (bridge_sup(x, 1, scale, sidedness), bridge_sup(x, 2, scale, sidedness)),
    );
    Ok(pairs.into_iter().unzip())
}

/// Upper-α quantile of the fractional-bridge supremum.
pub fn asymptotic_quantile(
    hurst: f64,
    alpha: f64,
    sidedness: Sidedness,
    grid_n: usize,
    reps: usize,
    seed: u64,
) -> Result<f64> {
    upper_quantile(&bridge_suprema(hurst, grid_n, reps, seed, sidedness)?, alpha)
}

/// Null statistics of `method` under `design`, one per replication.
pub fn null_statistics(design: &Design, method: Method, reps: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = Sampler::new(design)?;
    let norm = design.normalization(method)?;
    let sidedness = design.sidedness();
    let base = derive_seed(seed, &[design.n() as u64, coord(design.hurst())]);
    replicate(
        &sampler,
        reps,
        |p| derive_seed(base, &[p]),
        |x| evaluate(x, method, sidedness, &norm).map(|(v, _)| v),
    )
    .into_iter()
    .collect()
}

/// Upper-α quantile of the finite-sample null statistic.
pub fn finite_sample_quantile(design: &Design, method: Method, alpha: f64, reps: usize, seed: u64) -> Result<f64> {
    if reps < MIN_REPS {
        return Err(Error::InvalidParameter(format!(
            "reps must be ≥ {MIN_REPS}; got {reps}"
        )));
    }
    upper_quantile(&null_statistics(design, method, reps, seed)?, alpha)
}

/// Sample size of a table entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SampleSize {
    Finite(usize),
    Asymptotic,
}

impl std::fmt::Display for SampleSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SampleSize::Finite(n) => write!(f, "{n}"),
            SampleSize::Asymptotic => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for SampleSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "∞" => Ok(SampleSize::Asymptotic),
            t => t
                .parse()
                .map(SampleSize::Finite)
                .map_err(|_| Error::Parse(format!("bad sample size '{t}'"))),
        }
    }
}

/// Lookup key. `transform = "*"` matches any transform; asymptotic entries
/// under the Hermite scale are stored that way.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantileKey {
    pub alpha: f64,
    pub hurst: f64,
    pub sample_size: SampleSize,
    pub sidedness: Sidedness,
    pub method: Method,
    pub transform: String,
    pub scale: ScaleConvention,
}

impl QuantileKey {
    fn matches(&self, other: &QuantileKey) -> bool {
        (self.alpha - other.alpha).abs() < 1e-12
            && (self.hurst - other.hurst).abs() < 1e-12
            && self.sample_size == other.sample_size
            && self.sidedness == other.sidedness
            && self.method == other.method
            && self.scale == other.scale
            && (self.transform == other.transform || self.transform == "*" || other.transform == "*")
    }
}

impl std::fmt::Display for QuantileKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "alpha={} hurst={} n={} {} {} transform={} scale={}",
            self.alpha,
            self.hurst,
            self.sample_size,
            self.sidedness.name(),
            self.method.name(),
            self.transform,
            self.scale.name()
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantileEntry {
    pub key: QuantileKey,
    pub value: f64,
    pub reps: usize,
    /// Grid size of asymptotic entries.
    pub grid_n: Option<usize>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct Row {
    schema: u32,
    alpha: f64,
    hurst: f64,
    sample_size: String,
    sidedness: String,
    method: String,
    transform: String,
    scale: String,
    value: f64,
    reps: usize,
    grid_n: Option<usize>,
    seed: u64,
    estimator: String,
}

/// Critical values with the metadata needed to regenerate each one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuantileTable {
    entries: Vec<QuantileEntry>,
}

impl QuantileTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[QuantileEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts or replaces the entry with an equal key.
    pub fn insert(&mut self, entry: QuantileEntry) {
        match self
            .entries
            .iter_mut()
            .find(|e| e.key.matches(&entry.key) && e.key.transform == entry.key.transform)
        {
            Some(slot) => *slot = entry,
            None => self.entries.push(entry),
        }
    }

    pub fn get(&self, key: &QuantileKey) -> Option<f64> {
        let exact = self
            .entries
            .iter()
            .find(|e| e.key.matches(key) && e.key.transform == key.transform);
        exact
            .or_else(|| self.entries.iter().find(|e| e.key.matches(key)))
            .map(|e| e.value)
    }

    pub fn require(&self, key: &QuantileKey) -> Result<f64> {
        self.get(key).ok_or_else(|| Error::MissingQuantile(key.to_string()))
    }

    /// Estimates and stores the finite-sample quantile of `method` under `design`.
    pub fn add_finite(&mut self, design: &Design, method: Method, alpha: f64, reps: usize, seed: u64) -> Result<f64> {
        let value = finite_sample_quantile(design, method, alpha, reps, seed)?;
        self.insert(QuantileEntry {
            key: QuantileKey {
                alpha,
                hurst: design.hurst(),
                sample_size: SampleSize::Finite(design.n()),
                sidedness: design.sidedness(),
                method,
                transform: design.transform().name().to_string(),
                scale: design.scale(),
            },
            value,
            reps,
            grid_n: None,
            seed,
        });
        Ok(value)
    }

    /// Estimates the bridge quantile once and stores it for both methods under
    /// the Hermite scale, valid for every transform.
    pub fn add_asymptotic(
        &mut self,
        hurst: f64,
        alpha: f64,
        sidedness: Sidedness,
        grid_n: usize,
        reps: usize,
        seed: u64,
    ) -> Result<f64> {
        let value = asymptotic_quantile(hurst, alpha, sidedness, grid_n, reps, seed)?;
        for method in [Method::Cusum, Method::Wilcoxon] {
            self.insert(QuantileEntry {
                key: QuantileKey {
                    alpha,
                    hurst,
                    sample_size: SampleSize::Asymptotic,
                    sidedness,
                    method,
                    transform: "*".into(),
                    scale: ScaleConvention::Hermite,
                },
                value,
                reps,
                grid_n: Some(grid_n),
                seed,
            });
        }
        Ok(value)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for e in &self.entries {
            w.serialize(Row {
                schema: QUANTILE_SCHEMA,
                alpha: e.key.alpha,
                hurst: e.key.hurst,
                sample_size: e.key.sample_size.to_string(),
                sidedness: e.key.sidedness.name().into(),
                method: e.key.method.name().into(),
                transform: e.key.transform.clone(),
                scale: e.key.scale.name().into(),
                value: e.value,
                reps: e.reps,
                grid_n: e.grid_n,
                seed: e.seed,
                estimator: ESTIMATOR.into(),
            })
            .map_err(|err| Error::Io(err.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut table = Self::new();
        for (line, row) in r.deserialize::<Row>().enumerate() {
            let row = row.map_err(|err| Error::Parse(format!("quantile row {}: {err}", line + 1)))?;
            if row.schema != QUANTILE_SCHEMA {
                return Err(Error::Parse(format!(
                    "quantile row {}: unsupported schema {}",
                    line + 1,
                    row.schema
                )));
            }
            table.insert(QuantileEntry {
                key: QuantileKey {
                    alpha: row.alpha,
                    hurst: row.hurst,
                    sample_size: row.sample_size.parse()?,
                    sidedness: row.sidedness.parse()?,
                    method: row.method.parse()?,
                    transform: row.transform,
                    scale: row.scale.parse()?,
                },
                value: row.value,
                reps: row.reps,
                grid_n: row.grid_n,
                seed: row.seed,
            });
        }
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::Transform;

    #[test]
    fn order_statistic_convention() {
        let s: Vec<f64> = (1..=100).rev().map(f64::from).collect();
        assert_eq!(upper_quantile(&s, 0.05).unwrap(), 95.0);
        assert_eq!(upper_quantile(&s, 0.5).unwrap(), 50.0);
        assert_eq!(upper_quantile(&s, 1.0).unwrap(), 1.0);
        assert_eq!(upper_quantile_index(0.05, 10_000).unwrap(), 9500);
        assert_eq!(upper_quantile_index(0.001, 10).unwrap(), 10);
        assert!(upper_quantile(&s, 0.0).is_err());
        assert!(upper_quantile(&[], 0.1).is_err());
    }

    #[test]
    fn bridge_preconditions() {
        assert!(bridge_suprema(0.7, 512, 1000, 0, Sidedness::TwoSided).is_err());
        assert!(bridge_suprema(0.7, 1024, 999, 0, Sidedness::TwoSided).is_err());
    }

    #[test]
    fn alpha_one_is_sample_minimum() {
        let sup = bridge_suprema(0.7, 1024, 1000, 4, Sidedness::TwoSided).unwrap();
        let q = asymptotic_quantile(0.7, 1.0, Sidedness::TwoSided, 1024, 1000, 4).unwrap();
        assert!(sup.iter().all(|&s| q <= s));
        assert_eq!(q, sup.iter().copied().fold(f64::INFINITY, f64::min));
    }

    #[test]
    fn one_sided_below_two_sided() {
        let one = bridge_suprema(0.7, 1024, 1000, 9, Sidedness::OneSided).unwrap();
        let two = bridge_suprema(0.7, 1024, 1000, 9, Sidedness::TwoSided).unwrap();
        assert!(one.iter().zip(&two).all(|(a, b)| a <= b));
        let q1 = upper_quantile(&one, 0.05).unwrap();
        let q2 = upper_quantile(&two, 0.05).unwrap();
        assert!(q1 <= q2);
    }

    #[test]
    fn nested_fine_grid_dominates() {
        let (fine, coarse) = nested_bridge_suprema(0.7, 2048, 1000, 1, Sidedness::TwoSided).unwrap();
        assert!(fine.iter().zip(&coarse).all(|(f, c)| c <= f));
    }

    #[test]
    fn brownian_bridge_quantile_near_kolmogorov() {
        // sup|B°| has upper 5% point 1.3581.
        let q = asymptotic_quantile(0.5, 0.05, Sidedness::TwoSided, 4096, 4000, 11).unwrap();
        assert!((q - 1.358).abs() < 0.06, "{q}");
    }

    #[test]
    fn wilcoxon_quantile_is_transform_free() {
        let g = Design::lrd(200, 0.7, Transform::gaussian()).unwrap();
        let p = Design::lrd(200, 0.7, Transform::pareto31()).unwrap();
        let a = null_statistics(&g, Method::Wilcoxon, 300, 5).unwrap();
        let b = null_statistics(&p, Method::Wilcoxon, 300, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn table_roundtrip_and_lookup() {
        let mut t = QuantileTable::new();
        let key = QuantileKey {
            alpha: 0.05,
            hurst: 0.7,
            sample_size: SampleSize::Finite(266),
            sidedness: Sidedness::TwoSided,
            method: Method::Cusum,
            transform: "pareto31".into(),
            scale: ScaleConvention::Unit,
        };
        t.insert(QuantileEntry {
            key: key.clone(),
            value: 0.731,
            reps: 10_000,
            grid_n: None,
            seed: 3,
        });
        t.insert(QuantileEntry {
            key: QuantileKey {
                sample_size: SampleSize::Asymptotic,
                transform: "*".into(),
                scale: ScaleConvention::Hermite,
                ..key.clone()
            },
            value: 0.877,
            reps: 10_000,
            grid_n: Some(8192),
            seed: 3,
        });
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("schema,alpha,hurst,sample_size"));
        assert!(text.contains(",inf,"));
        let back = QuantileTable::read_csv(&buf[..]).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.require(&key).unwrap(), 0.731);
        let asym = QuantileKey {
            sample_size: SampleSize::Asymptotic,
            transform: "gaussian".into(),
            scale: ScaleConvention::Hermite,
            ..key.clone()
        };
        assert_eq!(back.require(&asym).unwrap(), 0.877);
        let missing = QuantileKey {
            sample_size: SampleSize::Finite(267),
            ..key
        };
        assert!(matches!(back.require(&missing), Err(Error::MissingQuantile(_))));
    }

    #[test]
    fn rejects_other_schema() {
        let text = "schema,alpha,hurst,sample_size,sidedness,method,transform,scale,value,reps,grid_n,seed,estimator\n\
                    2,0.05,0.7,10,two-sided,cusum,gaussian,unit,1.0,1000,,0,order-statistic-ceil\n";
        assert!(matches!(QuantileTable::read_csv(text.as_bytes()), Err(Error::Parse(_))));
    }
}
