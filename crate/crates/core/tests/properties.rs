mod common;

use common::*;
use lrd_changepoint::stats::{cusum_path, wilcoxon_path_doubled};
use lrd_changepoint::{
    fgn_autocovariance, generate_fgn, test_statistic, FgnGenerator64, LrdSpec, Method, Mode, Normalization, Series,
    Series32, Series64, Sidedness, Transform,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn paths_match_brute_force(x in series_strategy(200)) {
        common::paths_match_brute_force(&x)?;
    }

    #[test]
    fn wilcoxon_path_is_bounded(x in series_strategy(200)) {
        common::wilcoxon_path_is_bounded(&x)?;
    }

    #[test]
    fn wilcoxon_invariant_under_monotone_maps(x in series_strategy(120)) {
        wilcoxon_monotone_invariant(&x)?;
    }

    #[test]
    fn cusum_shift_invariant_scale_equivariant((x, c, a) in shift_scale_strategy()) {
        cusum_shift_scale(&x, c, a)?;
    }

    #[test]
    fn single_precision_agrees_on_integers(x in prop::collection::vec(-20i32..20, 2..100)) {
        let s64 = Series64::new(x.iter().map(|&v| f64::from(v)).collect()).unwrap();
        let s32 = Series32::new(x.iter().map(|&v| v as f32).collect()).unwrap();
        prop_assert_eq!(wilcoxon_path_doubled(&s64), wilcoxon_path_doubled(&s32));
        for (a, b) in cusum_path(&s64).iter().zip(cusum_path(&s32)) {
            prop_assert_eq!(*a, f64::from(b));
        }
    }

    #[test]
    fn two_sided_statistic_dominates_one_sided(x in series_strategy(80)) {
        let s = Series64::new(x).unwrap();
        let n = s.len();
        for method in [Method::Cusum, Method::Wilcoxon] {
            let norm = Normalization::iid(method, n).unwrap();
            let one = test_statistic(&s, method, Mode::Iid, Sidedness::OneSided, &norm, 1.0).unwrap();
            let two = test_statistic(&s, method, Mode::Iid, Sidedness::TwoSided, &norm, 1.0).unwrap();
            prop_assert!(two.statistic >= one.statistic);
            prop_assert!(two.argmax_k >= 1 && two.argmax_k < n);
        }
    }
}

#[test]
fn rejects_degenerate_input() {
    assert!(Series64::new(vec![1.0]).is_err());
    assert!(Series64::new(vec![1.0, f64::NAN]).is_err());
    assert!(Series64::new(vec![f64::INFINITY, 0.0]).is_err());
    assert!(FgnGenerator64::new(1, 0.7).is_err());
    assert!(FgnGenerator64::new(10, 1.0).is_err());
    assert!(LrdSpec::new(0.5).is_err());
}

#[test]
fn fgn_sample_covariance_matches_theory() {
    fgn_covariance_fidelity().unwrap();
}

#[test]
fn fgn_cross_sectional_covariance() {
    let (n, paths) = (64, 6000);
    let gen = FgnGenerator64::new(n, 0.8).unwrap();
    let mut c = 0.0;
    let mut v = 0.0;
    for p in 0..paths {
        let x = gen.sample(1000 + p as u64).into_values();
        c += x[3] * x[n - 1];
        v += x[n - 1] * x[n - 1];
    }
    let (c, v) = (c / paths as f64, v / paths as f64);
    assert!((v - 1.0).abs() < 0.06);
    assert!((c - fgn_autocovariance(0.8, n - 4)).abs() < 0.05);
}

#[test]
fn exact_dn_follows_power_law() {
    dn_ratio().unwrap();
}

#[test]
fn transformed_marginals_pass_ks() {
    transformed_marginals().unwrap();
}

#[test]
fn pareto_marginal_is_standardized() {
    let t = Transform::pareto31();
    let spec = LrdSpec::new(0.7).unwrap();
    let mut all = Vec::new();
    for r in 0..400 {
        let mut x = generate_fgn::<f64>(256, &spec, r).unwrap().into_values();
        t.apply_in_place(&mut x);
        all.extend(x);
    }
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let lower = all.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(mean.abs() < 0.03, "{mean}");
    assert!(lower >= t.support().0);
}

#[test]
fn null_size_is_calibrated() {
    null_size_calibration().unwrap();
}

#[test]
fn series_map_keeps_generic_type() {
    let s: Series<f32> = Series::new(vec![1.0f32, 2.0, 3.0]).unwrap();
    let m = s.map(|v| v * 2.0).unwrap();
    assert_eq!(m.values(), &[2.0f32, 4.0, 6.0]);
}
