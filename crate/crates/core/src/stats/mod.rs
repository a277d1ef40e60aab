//! CUSUM and Wilcoxon change-point statistics.
//!
//! Both statistics are built from a path indexed by the split point
//! k = 1..n−1: the CUSUM path Σ_{i≤k} Σ_{j>k} (X_j − X_i) and the Wilcoxon
//! path Σ_{i≤k} Σ_{j>k} (1{X_i ≤ X_j} − ½). A test divides the path
//! extremum by n·d_n·s, where d_n is the partial-sum scale of the noise
//! and s the Hermite scale of the method (|a₁| or |∫J₁ dF|); in i.i.d. mode
//! d_n = √n and s = σ.

mod fenwick;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fgn::{fgn_autocovariance, LrdSpec};
use crate::scalar::{CompensatedSum, Scalar};

use fenwick::Fenwick;

/// σ of the Wilcoxon kernel projection under i.i.d. data, √(1/12).
pub const IID_WILCOXON_SIGMA: f64 = 0.288_675_134_594_812_9;

/// A finite real sample of length at least two.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series<T> {
    values: Vec<T>,
}

impl<T: Scalar> Series<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidLength(format!(
                "a series needs n ≥ 2 values; got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite value {} at index {i}",
                values[i]
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cusum,
    Wilcoxon,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Cusum => "cusum",
            Method::Wilcoxon => "wilcoxon",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cusum" => Ok(Method::Cusum),
            "wilcoxon" => Ok(Method::Wilcoxon),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    OneSided,
    TwoSided,
}

impl Sidedness {
    pub fn name(&self) -> &'static str {
        match self {
            Sidedness::OneSided => "one-sided",
            Sidedness::TwoSided => "two-sided",
        }
    }
}

impl std::str::FromStr for Sidedness {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "one-sided" | "one" => Ok(Sidedness::OneSided),
            "two-sided" | "two" => Ok(Sidedness::TwoSided),
            other => Err(Error::Parse(format!("unknown sidedness '{other}'"))),
        }
    }
}

/// Dependence regime the normalization is built for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Lrd(LrdSpec),
    Iid,
}

/// Scale constants dividing the path extremum: statistic = max / (n·dn·hermite_scale).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Normalization {
    method: Method,
    mode: Mode,
    n: usize,
    dn: f64,
    hermite_scale: f64,
    dn_exact: bool,
}

impl Normalization {
    /// LRD normalization with an explicit Hermite scale (|a₁| for CUSUM,
    /// |∫J₁ dF| for Wilcoxon, or 1 for the unscaled statistic).
    pub fn lrd(method: Method, n: usize, spec: LrdSpec, hermite_scale: f64, exact: bool) -> Result<Self> {
        let dn = dn(n, &spec, exact)?;
        Self::validated(method, Mode::Lrd(spec), n, dn, hermite_scale, exact)
    }

    /// Gaussian-data LRD normalization: |a₁| = 1 and |∫J₁ dF| = 1/(2√π).
    pub fn lrd_gaussian(method: Method, n: usize, spec: LrdSpec) -> Result<Self> {
        let scale = match method {
            Method::Cusum => 1.0,
            Method::Wilcoxon => 0.5 / std::f64::consts::PI.sqrt(),
        };
        Self::lrd(method, n, spec, scale, false)
    }

    /// i.i.d. normalization n^{3/2}·σ with σ = 1 (CUSUM on unit-variance
    /// data) or σ = √(1/12) (Wilcoxon).
    pub fn iid(method: Method, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidLength(format!("n must be ≥ 2; got {n}")));
        }
        let scale = match method {
            Method::Cusum => 1.0,
            Method::Wilcoxon => IID_WILCOXON_SIGMA,
        };
        Self::validated(method, Mode::Iid, n, (n as f64).sqrt(), scale, true)
    }

    /// Fully explicit constructor; rejects nonpositive scales and i.i.d.
    /// scales other than the fixed ones.
    pub fn new(method: Method, mode: Mode, n: usize, dn: f64, hermite_scale: f64) -> Result<Self> {
        Self::validated(method, mode, n, dn, hermite_scale, false)
    }

    fn validated(method: Method, mode: Mode, n: usize, dn: f64, hermite_scale: f64, dn_exact: bool) -> Result<Self> {
        if !(dn > 0.0 && dn.is_finite()) {
            return Err(Error::InconsistentNormalization(format!(
                "d_n must be positive; got {dn}"
            )));
        }
        if !(hermite_scale > 0.0 && hermite_scale.is_finite()) {
            return Err(Error::InconsistentNormalization(format!(
                "hermite scale must be positive; got {hermite_scale}"
            )));
        }
        if mode == Mode::Iid {
            let want = match method {
                Method::Cusum => 1.0,
                Method::Wilcoxon => IID_WILCOXON_SIGMA,
            };
            if (hermite_scale - want).abs() > 1e-12 || (dn - (n as f64).sqrt()).abs() > 1e-9 * dn {
                return Err(Error::InconsistentNormalization(format!(
                    "i.i.d. {} normalization requires d_n = √n and scale {want}",
                    method.name()
                )));
            }
        }
        Ok(Self {
            method,
            mode,
            n,
            dn,
            hermite_scale,
            dn_exact,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dn(&self) -> f64 {
        self.dn
    }

    pub fn hermite_scale(&self) -> f64 {
        self.hermite_scale
    }

    pub fn dn_exact(&self) -> bool {
        self.dn_exact
    }

    /// n·d_n·scale.
    pub fn denominator(&self) -> f64 {
        self.n as f64 * self.dn * self.hermite_scale
    }
}

/// Outcome of one change-point test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestReport<T> {
    pub method: Method,
    pub mode: Mode,
    pub sidedness: Sidedness,
    pub n: usize,
    pub dn: f64,
    pub hermite_scale: f64,
    pub statistic: f64,
    /// Path entries for k = 1..n−1 (index k−1), unnormalized.
    pub raw_path: Vec<T>,
    /// 1-based split attaining the statistic; ties resolve to the smallest k.
    pub argmax_k: usize,
    pub critical_value: f64,
    pub reject: bool,
}

/// CUSUM path k·S_n − n·S_k for k = 1..n−1.
///
/// Values are anchored at X₁ before summation (the path is invariant under
/// shifts), and prefix sums are compensated.
pub fn cusum_path<T: Scalar>(series: &Series<T>) -> Vec<T> {
    let x = series.values();
    let n = x.len();
    let anchor = x[0];
    let mut acc = CompensatedSum::<T>::new();
    let partial: Vec<T> = x
        .iter()
        .map(|&v| {
            acc.add(v - anchor);
            acc.value()
        })
        .collect();
    let total = partial[n - 1];
    let nf = T::from_usize_lossy(n);
    (1..n)
        .map(|k| T::from_usize_lossy(k) * total - nf * partial[k - 1])
        .collect()
}

/// Twice the Wilcoxon path: 2·Σ_{i≤k} Σ_{j>k} 1{X_i ≤ X_j} − k(n−k), exact in integers.
///
/// The split moves left to right. When X_{k+1} crosses over, the count loses
/// #{i ≤ k : X_i ≤ X_{k+1}} and gains #{j ≥ k+2 : X_{k+1} ≤ X_j}; both come
/// from Fenwick trees over dense ranks, so ties follow the ≤ convention.
pub fn wilcoxon_path_doubled<T: Scalar>(series: &Series<T>) -> Vec<i64> {
    let x = series.values();
    let n = x.len();
    let ranks = dense_ranks(x);
    let distinct = ranks.iter().copied().max().unwrap_or(0);
    let mut left = Fenwick::new(distinct);
    let mut right = Fenwick::new(distinct);
    for &r in &ranks {
        right.add(r, 1);
    }
    let mut count: i64 = 0;
    let mut out = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let r = ranks[k];
        right.add(r, -1);
        let right_total = (n - k - 1) as i64;
        let right_ge = right_total - right.prefix(r - 1);
        let left_le = left.prefix(r);
        count += right_ge - left_le;
        left.add(r, 1);
        let split = (k + 1) as i64;
        out.push(2 * count - split * (n as i64 - split));
    }
    out
}

/// Wilcoxon path Σ_{i≤k} Σ_{j>k} (1{X_i ≤ X_j} − ½) for k = 1..n−1.
pub fn wilcoxon_path<T: Scalar>(series: &Series<T>) -> Vec<T> {
    let half = T::from_f64_lossy(0.5);
    wilcoxon_path_doubled(series)
        .into_iter()
        .map(|d| T::from_f64_lossy(d as f64) * half)
        .collect()
}

/// 1-based dense ranks; equal values share a rank.
fn dense_ranks<T: Scalar>(x: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_unstable_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite values"));
    let mut ranks = vec![0usize; x.len()];
    let mut rank = 0;
    let mut prev: Option<T> = None;
    for &i in &order {
        if prev != Some(x[i]) {
            rank += 1;
            prev = Some(x[i]);
        }
        ranks[i] = rank;
    }
    ranks
}

/// Partial-sum scale d_n.
///
/// `exact = false` gives n^{1−D/2}; `exact = true` gives
/// √(Σ_{i,j≤n} ρ(|i−j|)) = √(n + 2Σ_{k<n} (n−k)ρ(k)).
pub fn dn(n: usize, spec: &LrdSpec, exact: bool) -> Result<f64> {
    dn_for_hurst(n, spec.hurst(), exact)
}

pub(crate) fn dn_for_hurst(n: usize, hurst: f64, exact: bool) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidLength("d_n needs n ≥ 1".into()));
    }
    if !exact {
        return Ok((n as f64).powf(hurst));
    }
    let mut acc = CompensatedSum::<f64>::new();
    acc.add(n as f64);
    for k in 1..n {
        acc.add(2.0 * (n - k) as f64 * fgn_autocovariance(hurst, k));
    }
    Ok(acc.value().sqrt())
}

/// Extremum of a path: (value, 1-based argmax), smallest k on ties.
pub fn path_extremum<T: Scalar>(path: &[T], sidedness: Sidedness) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 1;
    for (i, &v) in path.iter().enumerate() {
        let v = v.to_f64_lossy();
        let v = match sidedness {
            Sidedness::OneSided => v,
            Sidedness::TwoSided => v.abs(),
        };
        if v > best {
            best = v;
            arg = i + 1;
        }
    }
    (best, arg)
}

/// Runs a CUSUM or Wilcoxon test and returns the full report.
pub fn test_statistic<T: Scalar>(
    series: &Series<T>,
    method: Method,
    mode: Mode,
    sidedness: Sidedness,
    norm: &Normalization,
    critical_value: f64,
) -> Result<TestReport<T>> {
    if norm.method != method {
        return Err(Error::InconsistentNormalization(format!(
            "normalization built for {} but test is {}",
            norm.method.name(),
            method.name()
        )));
    }
    if norm.mode != mode {
        return Err(Error::InconsistentNormalization(format!(
            "normalization mode {:?} does not match test mode {mode:?}",
            norm.mode
        )));
    }
    if norm.n != series.len() {
        return Err(Error::InconsistentNormalization(format!(
            "normalization built for n = {} but series has n = {}",
            norm.n,
            series.len()
        )));
    }
    let raw_path = match method {
        Method::Cusum => cusum_path(series),
        Method::Wilcoxon => wilcoxon_path(series),
    };
    let (extremum, argmax_k) = path_extremum(&raw_path, sidedness);
    let statistic = extremum / norm.denominator();
    Ok(TestReport {
        method,
        mode,
        sidedness,
        n: series.len(),
        dn: norm.dn,
        hermite_scale: norm.hermite_scale,
        statistic,
        raw_path,
        argmax_k,
        critical_value,
        reject: statistic >= critical_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: &[f64]) -> Series<f64> {
        Series::new(v.to_vec()).unwrap()
    }

    fn brute_cusum(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (1..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..k {
                    for j in k..n {
                        s += x[j] - x[i];
                    }
                }
                s
            })
            .collect()
    }

    #[test]
    fn series_validation() {
        assert!(matches!(Series::new(vec![1.0]), Err(Error::InvalidLength(_))));
        assert!(Series::new(vec![1.0, f64::NAN]).is_err());
        assert!(Series::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn cusum_examples() {
        assert_eq!(cusum_path(&series(&[0.0, 0.0, 1.0, 1.0]))[1], 4.0);
        assert_eq!(
            cusum_path(&series(&[0.0, 0.0, 1.0, 1.0])),
            brute_cusum(&[0.0, 0.0, 1.0, 1.0])
        );
        assert!(cusum_path(&series(&[0.1; 17])).iter().all(|&v| v == 0.0));
        let x = [0.3, -1.2, 2.5, 0.7, 0.0];
        let shifted: Vec<f64> = x.iter().map(|v| v + 5.0).collect();
        let a = cusum_path(&series(&x));
        let b = cusum_path(&series(&shifted));
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn wilcoxon_examples() {
        assert_eq!(wilcoxon_path(&series(&[1.0, 2.0, 3.0])), vec![1.0, 1.0]);
        assert_eq!(wilcoxon_path(&series(&[3.0, 2.0, 1.0])), vec![-1.0, -1.0]);
        // Ties: 1{x ≤ x} = 1, so every cross pair contributes ½.
        let tied = wilcoxon_path(&series(&[2.0, 2.0, 2.0, 2.0]));
        assert_eq!(tied, vec![1.5, 2.0, 1.5]);
    }

    #[test]
    fn wilcoxon_monotone_invariance_example() {
        let x: [f64; 6] = [0.4, -1.0, 2.2, 0.9, -0.3, 1.7];
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        assert_eq!(wilcoxon_path(&series(&x)), wilcoxon_path(&series(&y)));
    }

    #[test]
    fn dn_examples() {
        let spec = LrdSpec::from_d(0.6).unwrap();
        assert!((dn(100, &spec, false).unwrap() - 100f64.powf(0.7)).abs() < 1e-12);
        assert!((dn(100, &spec, false).unwrap() - 25.118_864_315_095_8).abs() < 1e-9);
        assert_eq!(dn(1, &spec, true).unwrap(), 1.0);
        // Exact fGn partial sums have variance n^{2H}.
        let exact = dn(1000, &spec, true).unwrap();
        assert!((exact / 1000f64.powf(0.7) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_series_statistic_zero() {
        let spec = LrdSpec::new(0.7).unwrap();
        let s = series(&[3.25; 50]);
        for method in [Method::Cusum, Method::Wilcoxon] {
            for sided in [Sidedness::OneSided, Sidedness::TwoSided] {
                let norm = Normalization::lrd_gaussian(method, 50, spec).unwrap();
                let r = test_statistic(&s, method, Mode::Lrd(spec), sided, &norm, 0.5).unwrap();
                match method {
                    Method::Cusum => assert_eq!(r.statistic, 0.0),
                    // Ties are counted with ≤, so constant data give k(n−k)/2 > 0.
                    Method::Wilcoxon => assert!(r.statistic > 0.0),
                }
                if method == Method::Cusum {
                    assert!(!r.reject);
                }
            }
        }
    }

    #[test]
    fn gaussian_scales() {
        let spec = LrdSpec::new(0.7).unwrap();
        let c = Normalization::lrd_gaussian(Method::Cusum, 10, spec).unwrap();
        let w = Normalization::lrd_gaussian(Method::Wilcoxon, 10, spec).unwrap();
        assert_eq!(c.hermite_scale(), 1.0);
        assert!((w.hermite_scale() - 0.282_094_791_773_878_1).abs() < 1e-15);
    }

    #[test]
    fn inconsistent_normalization() {
        let spec = LrdSpec::new(0.7).unwrap();
        let s = series(&[1.0, 2.0, 0.5, 0.1]);
        let norm = Normalization::lrd_gaussian(Method::Cusum, 4, spec).unwrap();
        let mode = Mode::Lrd(spec);
        let r = test_statistic(&s, Method::Wilcoxon, mode, Sidedness::TwoSided, &norm, 1.0);
        assert!(matches!(r, Err(Error::InconsistentNormalization(_))));
        let r = test_statistic(&s, Method::Cusum, Mode::Iid, Sidedness::TwoSided, &norm, 1.0);
        assert!(matches!(r, Err(Error::InconsistentNormalization(_))));
        let wrong_n = Normalization::lrd_gaussian(Method::Cusum, 5, spec).unwrap();
        let r = test_statistic(&s, Method::Cusum, mode, Sidedness::TwoSided, &wrong_n, 1.0);
        assert!(matches!(r, Err(Error::InconsistentNormalization(_))));
        assert!(Normalization::new(Method::Wilcoxon, Mode::Iid, 4, 2.0, 1.0).is_err());
        assert!(Normalization::new(Method::Cusum, mode, 4, 2.0, 0.0).is_err());
    }

    #[test]
    fn iid_normalization() {
        let n = 400;
        let c = Normalization::iid(Method::Cusum, n).unwrap();
        let w = Normalization::iid(Method::Wilcoxon, n).unwrap();
        assert!((c.denominator() - 400f64.powf(1.5)).abs() < 1e-6);
        assert!((w.denominator() - 400f64.powf(1.5) * (1.0f64 / 12.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn argmax_ties_take_smallest_k() {
        let path = [1.0, 3.0, -3.0, 3.0];
        assert_eq!(path_extremum(&path, Sidedness::TwoSided), (3.0, 2));
        assert_eq!(path_extremum(&path, Sidedness::OneSided), (3.0, 2));
        let path = [1.0, -4.0, 2.0];
        assert_eq!(path_extremum(&path, Sidedness::TwoSided), (4.0, 2));
        assert_eq!(path_extremum(&path, Sidedness::OneSided), (2.0, 3));
    }

    #[test]
    fn generic_over_f32() {
        let s = Series::<f32>::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(cusum_path(&s)[1], 4.0f32);
        assert_eq!(wilcoxon_path(&s), vec![1.5f32, 2.0, 1.5]);
    }
}
