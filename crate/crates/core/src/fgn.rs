//! Exact synthesis of fractional Gaussian noise by circulant embedding.
//!
//! The covariance sequence ρ(0..=m) of unit-variance fGn is embedded in a
//! symmetric circulant of size 2m, where m is the smallest power of two with
//! m ≥ n − 1. Its eigenvalues (one real FFT of the first row) are
//! nonnegative for every H in (0, 1); values in [−1e−9, 0) are rounding noise
//! and are clamped to zero, anything more negative is reported as an error.
//! A sample is the real part of the FFT of `sqrt(λ/2m) · (A + iB)` with
//! A, B independent standard normal vectors, so the first n coordinates
//! have covariance exactly Toeplitz(ρ(0..n−1)). The imaginary part is an
//! independent second sample, exposed through [`FgnGenerator::sample_pair_into`].

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::rng::GaussianStream;
use crate::scalar::Scalar;

/// Eigenvalues in `[-EIGENVALUE_FLOOR, 0)` are clamped to zero.
pub const EIGENVALUE_FLOOR: f64 = 1e-9;

/// Long-range dependence parameters of the underlying Gaussian process.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LrdSpec {
    hurst: f64,
}

impl LrdSpec {
    /// Requires 1/2 < H < 1.
    pub fn new(hurst: f64) -> Result<Self> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "hurst must lie in (0.5, 1); got {hurst}"
            )));
        }
        Ok(Self { hurst })
    }

    /// Builds the spec from D = 2 − 2H, 0 < D < 1.
    pub fn from_d(d: f64) -> Result<Self> {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::InvalidParameter(format!("D must lie in (0, 1); got {d}")));
        }
        Self::new(1.0 - d / 2.0)
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// D = 2 − 2H.
    pub fn d(&self) -> f64 {
        2.0 - 2.0 * self.hurst
    }

    /// Hermite rank assumed for the transformed process; fixed at 1.
    pub fn hermite_rank(&self) -> usize {
        1
    }

    pub fn autocovariance(&self, lag: usize) -> f64 {
        fgn_autocovariance(self.hurst, lag)
    }

    /// The limit of ρ(k)·k^D, i.e. the constant slowly varying factor H(2H − 1).
    pub fn slowly_varying_limit(&self) -> f64 {
        self.hurst * (2.0 * self.hurst - 1.0)
    }
}

/// Autocovariance ρ(k) = ½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H}) of unit fGn.
pub fn fgn_autocovariance(hurst: f64, lag: usize) -> f64 {
    if lag == 0 {
        return 1.0;
    }
    let k = lag as f64;
    let two_h = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).powf(two_h))
}

/// A realized noise vector together with the parameters that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath<T> {
    values: Vec<T>,
    hurst: f64,
    seed: u64,
}

impl<T: Scalar> NoisePath<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reusable circulant-embedding sampler for a fixed (n, H).
pub struct FgnGenerator<T: Scalar> {
    n: usize,
    hurst: f64,
    sqrt_eigenvalues: Arc<[T]>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Scalar> Clone for FgnGenerator<T> {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            hurst: self.hurst,
            sqrt_eigenvalues: Arc::clone(&self.sqrt_eigenvalues),
            fft: Arc::clone(&self.fft),
        }
    }
}

impl<T: Scalar> std::fmt::Debug for FgnGenerator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnGenerator")
            .field("n", &self.n)
            .field("hurst", &self.hurst)
            .field("embedding", &self.sqrt_eigenvalues.len())
            .finish()
    }
}

impl<T: Scalar> FgnGenerator<T> {
    /// Any H in (0, 1) is accepted; H = 1/2 yields white noise.
    pub fn new(n: usize, hurst: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidLength(format!("n must be ≥ 2; got {n}")));
        }
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "hurst must lie in (0, 1); got {hurst}"
            )));
        }
        let m = (n - 1).next_power_of_two();
        let size = 2 * m;
        let eigenvalues = circulant_eigenvalues(hurst, m)?;
        let scale = 1.0 / size as f64;
        let sqrt_eigenvalues: Arc<[T]> = eigenvalues
            .iter()
            .map(|&l| T::from_f64_lossy((l * scale).sqrt()))
            .collect();
        let fft = FftPlanner::<T>::new().plan_fft_forward(size);
        Ok(Self {
            n,
            hurst,
            sqrt_eigenvalues,
            fft,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn embedding_size(&self) -> usize {
        self.sqrt_eigenvalues.len()
    }

    fn fill_spectrum(&self, seed: u64, buf: &mut Vec<Complex<T>>) {
        let mut gauss = GaussianStream::from_seed(seed);
        buf.clear();
        buf.extend(self.sqrt_eigenvalues.iter().map(|&s| {
            let (a, b) = gauss.next_pair();
            Complex::new(s * T::from_f64_lossy(a), s * T::from_f64_lossy(b))
        }));
        self.fft.process(buf);
    }

    /// Writes one path into `out[..n]`, using `buf` as FFT workspace.
    pub fn sample_into(&self, seed: u64, out: &mut [T], buf: &mut Vec<Complex<T>>) {
        self.fill_spectrum(seed, buf);
        for (o, z) in out[..self.n].iter_mut().zip(buf.iter()) {
            *o = z.re;
        }
    }

    /// Writes two independent paths from a single FFT. `first` equals the
    /// output of [`Self::sample_into`] for the same seed.
    pub fn sample_pair_into(&self, seed: u64, first: &mut [T], second: &mut [T], buf: &mut Vec<Complex<T>>) {
        self.fill_spectrum(seed, buf);
        for ((a, b), z) in first[..self.n]
            .iter_mut()
            .zip(second[..self.n].iter_mut())
            .zip(buf.iter())
        {
            *a = z.re;
            *b = z.im;
        }
    }

    pub fn sample(&self, seed: u64) -> NoisePath<T> {
        let mut values = vec![T::zero(); self.n];
        let mut buf = Vec::with_capacity(self.embedding_size());
        self.sample_into(seed, &mut values, &mut buf);
        NoisePath {
            values,
            hurst: self.hurst,
            seed,
        }
    }
}

/// Eigenvalues of the circulant of size 2m built from ρ(0..=m).
fn circulant_eigenvalues(hurst: f64, m: usize) -> Result<Vec<f64>> {
    let size = 2 * m;
    let mut row: Vec<Complex<f64>> = (0..size)
        .map(|j| {
            let lag = if j <= m { j } else { size - j };
            Complex::new(fgn_autocovariance(hurst, lag), 0.0)
        })
        .collect();
    FftPlanner::<f64>::new().plan_fft_forward(size).process(&mut row);
    row.iter()
        .enumerate()
        .map(|(index, z)| {
            let l = z.re;
            if l >= 0.0 {
                Ok(l)
            } else if l >= -EIGENVALUE_FLOOR {
                Ok(0.0)
            } else {
                Err(Error::EmbeddingNotPsd { index, eigenvalue: l })
            }
        })
        .collect()
}

/// Generates n ≥ 2 values of unit-variance fGn for the given spec and seed.
pub fn generate_fgn<T: Scalar>(n: usize, spec: &LrdSpec, seed: u64) -> Result<NoisePath<T>> {
    Ok(FgnGenerator::new(n, spec.hurst())?.sample(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocovariance_examples() {
        assert_eq!(fgn_autocovariance(0.7, 0), 1.0);
        assert_eq!(fgn_autocovariance(0.5, 1), 0.0);
        // ½(2^1.4 − 2), evaluated independently.
        let want = 0.5 * (2f64.powf(1.4) - 2.0);
        assert!((fgn_autocovariance(0.7, 1) - want).abs() < 1e-15);
        assert!((want - 0.319_507_910_772_894_3).abs() < 1e-12);
    }

    #[test]
    fn autocovariance_positive_and_decreasing() {
        let spec = LrdSpec::new(0.7).unwrap();
        let mut prev = spec.autocovariance(0);
        for k in 1..=100 {
            let r = spec.autocovariance(k);
            assert!(r > 0.0 && r < prev, "lag {k}");
            prev = r;
        }
    }

    #[test]
    fn autocovariance_tail_matches_power_law() {
        let spec = LrdSpec::new(0.7).unwrap();
        let k = 10_000usize;
        let ratio = spec.autocovariance(k) * (k as f64).powf(spec.d());
        assert!((ratio / spec.slowly_varying_limit() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn spec_validation() {
        assert!(LrdSpec::new(0.5).is_err());
        assert!(LrdSpec::new(1.0).is_err());
        assert!(LrdSpec::new(f64::NAN).is_err());
        let s = LrdSpec::from_d(0.6).unwrap();
        assert!((s.hurst() - 0.7).abs() < 1e-15);
        assert_eq!(s.d(), 2.0 - 2.0 * s.hurst());
        assert_eq!(s.hermite_rank(), 1);
    }

    #[test]
    fn invalid_length() {
        let spec = LrdSpec::new(0.7).unwrap();
        assert!(matches!(generate_fgn::<f64>(1, &spec, 0), Err(Error::InvalidLength(_))));
    }

    #[test]
    fn determinism() {
        let spec = LrdSpec::new(0.7).unwrap();
        let a = generate_fgn::<f64>(4, &spec, 99).unwrap();
        let b = generate_fgn::<f64>(4, &spec, 99).unwrap();
        let bits = |p: &NoisePath<f64>| p.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a, generate_fgn::<f64>(4, &spec, 100).unwrap());
    }

    #[test]
    fn pair_first_component_matches_single_sample() {
        let g = FgnGenerator::<f64>::new(100, 0.8).unwrap();
        let single = g.sample(5);
        let mut a = vec![0.0; 100];
        let mut b = vec![0.0; 100];
        let mut buf = Vec::new();
        g.sample_pair_into(5, &mut a, &mut b, &mut buf);
        assert_eq!(single.values(), &a[..]);
        assert_ne!(a, b);
    }

    #[test]
    fn eigenvalues_nonnegative_over_hurst_range() {
        for &h in &[0.05, 0.3, 0.5, 0.55, 0.7, 0.9, 0.99] {
            for &m in &[1usize, 2, 64, 4096] {
                let eig = circulant_eigenvalues(h, m).unwrap();
                assert!(eig.iter().all(|&l| l >= 0.0));
            }
        }
    }

    #[test]
    fn f32_generation() {
        let g = FgnGenerator::<f32>::new(64, 0.7).unwrap();
        let p = g.sample(1);
        assert_eq!(p.len(), 64);
        assert!(p.values().iter().all(|x| x.is_finite()));
    }
}
