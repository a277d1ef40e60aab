//! Checks shared by the property suite and the acceptance runner.
#![allow(dead_code)]

use lrd_changepoint::montecarlo::{finite_sample_quantile, null_statistics, Design};
use lrd_changepoint::stats::{cusum_path, dn, wilcoxon_path, wilcoxon_path_doubled};
use lrd_changepoint::{fgn_autocovariance, generate_fgn, FgnGenerator64, LrdSpec, Method, Series64, Transform};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub type Check = std::result::Result<(), String>;

pub fn brute_cusum(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let total: f64 = x.iter().sum();
    (1..n)
        .map(|k| {
            let s: f64 = x[..k].iter().sum();
            k as f64 * total - n as f64 * s
        })
        .collect()
}

pub fn brute_wilcoxon_doubled(x: &[f64]) -> Vec<i64> {
    let n = x.len();
    (1..n)
        .map(|k| {
            let mut c = 0i64;
            for i in 0..k {
                for j in k..n {
                    c += 2 * i64::from(x[i] <= x[j]) - 1;
                }
            }
            c
        })
        .collect()
}

/// Mixes heavy ties (small integers) with continuous values.
pub fn series_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    let value = prop_oneof![(-3i32..=3).prop_map(f64::from), -50.0f64..50.0];
    prop::collection::vec(value, 2..=max_len)
}

pub fn shift_scale_strategy() -> impl Strategy<Value = (Vec<f64>, f64, f64)> {
    (
        prop::collection::vec(-10.0f64..10.0, 2..150),
        -1e3f64..1e3,
        0.01f64..100.0,
    )
}

pub fn paths_match_brute_force(x: &[f64]) -> std::result::Result<(), TestCaseError> {
    let s = Series64::new(x.to_vec()).unwrap();
    let scale = x.len() as f64 * x.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
    for (a, b) in cusum_path(&s).iter().zip(brute_cusum(x)) {
        prop_assert!((a - b).abs() <= 1e-12 * scale, "cusum {a} vs {b}");
    }
    prop_assert_eq!(wilcoxon_path_doubled(&s), brute_wilcoxon_doubled(x));
    Ok(())
}

pub fn wilcoxon_path_is_bounded(x: &[f64]) -> std::result::Result<(), TestCaseError> {
    let n = x.len();
    for (i, w) in wilcoxon_path(&Series64::new(x.to_vec()).unwrap()).iter().enumerate() {
        let k = i + 1;
        prop_assert!(w.abs() <= (k * (n - k)) as f64 / 2.0);
    }
    Ok(())
}

pub fn wilcoxon_monotone_invariant(x: &[f64]) -> std::result::Result<(), TestCaseError> {
    let s = Series64::new(x.to_vec()).unwrap();
    let base = wilcoxon_path_doubled(&s);
    prop_assert_eq!(&base, &wilcoxon_path_doubled(&s.map(|v| (v / 10.0).exp()).unwrap()));
    prop_assert_eq!(
        &base,
        &wilcoxon_path_doubled(&s.map(|v| v * v * v + 2.0 * v - 7.0).unwrap())
    );
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Without ties, a decreasing map negates the path.
    if sorted.windows(2).all(|w| w[0] != w[1]) {
        let flipped = wilcoxon_path_doubled(&s.map(|v| -v).unwrap());
        prop_assert_eq!(flipped, base.iter().map(|b| -b).collect::<Vec<_>>());
    }
    Ok(())
}

pub fn cusum_shift_scale(x: &[f64], c: f64, a: f64) -> std::result::Result<(), TestCaseError> {
    let s = Series64::new(x.to_vec()).unwrap();
    let base = cusum_path(&s);
    let shifted = cusum_path(&s.map(|v| v + c).unwrap());
    let scaled = cusum_path(&s.map(|v| a * v).unwrap());
    let n2 = (x.len() * x.len()) as f64;
    for i in 0..base.len() {
        prop_assert!((base[i] - shifted[i]).abs() <= 1e-9 * n2 * (10.0 + c.abs()));
        prop_assert!((a * base[i] - scaled[i]).abs() <= 1e-12 * a * n2 * 10.0);
    }
    Ok(())
}

/// Runs `check` on `cases` inputs drawn from `strategy`.
pub fn run_property<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> std::result::Result<(), TestCaseError>,
) -> Check {
    let mut runner = TestRunner::new(Config {
        failure_persistence: None,
        ..Config::with_cases(cases)
    });
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

/// Lag products averaged within and across paths against ρ(k).
pub fn fgn_covariance_fidelity() -> Check {
    let hurst = 0.7;
    let (n, paths) = (128, 4000);
    let gen = FgnGenerator64::new(n, hurst).map_err(|e| e.to_string())?;
    let lags = [0usize, 1, 2, 5, 10];
    let mut acc = [0.0; 5];
    for p in 0..paths {
        let x = gen.sample(p as u64).into_values();
        for (slot, &lag) in acc.iter_mut().zip(&lags) {
            let s: f64 = (0..n - lag).map(|t| x[t] * x[t + lag]).sum();
            *slot += s / (n - lag) as f64;
        }
    }
    for (sum, &lag) in acc.iter().zip(&lags) {
        let est = sum / paths as f64;
        let want = fgn_autocovariance(hurst, lag);
        if (est - want).abs() >= 0.02 {
            return Err(format!("lag {lag}: {est} vs {want}"));
        }
    }
    Ok(())
}

/// d_n² / (L·n^{2−D}) at n = 10⁵ against 2/((1−D)(2−D)) = 25/7 for D = 0.6.
pub fn dn_ratio() -> Check {
    let spec = LrdSpec::from_d(0.6).unwrap();
    let n = 100_000usize;
    let d = spec.d();
    let exact = dn(n, &spec, true).map_err(|e| e.to_string())?;
    let ratio = exact * exact / (spec.slowly_varying_limit() * (n as f64).powf(2.0 - d));
    let limit = 2.0 / ((1.0 - d) * (2.0 - d));
    if (limit - 25.0 / 7.0).abs() > 1e-12 || (ratio / limit - 1.0).abs() >= 0.05 {
        return Err(format!("ratio {ratio} vs {limit}"));
    }
    Ok(())
}

/// Null rejection rate within 3 standard errors of α at n = 500, R = 2000,
/// using finite-sample quantiles from an independent seed.
pub fn null_size_calibration() -> Check {
    let n = 500;
    let (alpha, reps) = (0.05, 2000);
    let se = (alpha * (1.0 - alpha) / reps as f64).sqrt();
    let designs = [
        Design::lrd(n, 0.7, Transform::gaussian()),
        Design::iid(n, Transform::gaussian()),
    ];
    for design in designs {
        let design = design.map_err(|e| e.to_string())?;
        for method in [Method::Cusum, Method::Wilcoxon] {
            let q = finite_sample_quantile(&design, method, alpha, 20_000, 101).map_err(|e| e.to_string())?;
            let stats = null_statistics(&design, method, reps, 202).map_err(|e| e.to_string())?;
            let size = stats.iter().filter(|&&s| s > q).count() as f64 / reps as f64;
            if (size - alpha).abs() > 3.0 * se {
                return Err(format!("{} {:?}: size {size}, q {q}", method.name(), design.mode()));
            }
        }
    }
    Ok(())
}

/// Kolmogorov–Smirnov distance of `sample` from `cdf`.
pub fn ks_distance(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
        })
        .fold(0.0, f64::max)
}

/// Marginals of G(ξ_t) at fixed positions across independent paths.
pub fn transformed_marginals() -> Check {
    let spec = LrdSpec::new(0.7).unwrap();
    let reps = 3000;
    let crit = 1.63 / (reps as f64).sqrt();
    for t in [Transform::gaussian(), Transform::pareto31()] {
        for pos in [0usize, 17, 63] {
            let sample: Vec<f64> = (0..reps)
                .map(|r| {
                    let mut x = generate_fgn::<f64>(64, &spec, 5_000 + r as u64).unwrap().into_values();
                    t.apply_in_place(&mut x);
                    x[pos]
                })
                .collect();
            let d = ks_distance(sample, |x| t.cdf(x));
            if d >= crit {
                return Err(format!("{} position {pos}: KS {d}", t.name()));
            }
        }
    }
    Ok(())
}
