//! Rejection-rate estimation under level-shift alternatives.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::quantile::{QuantileKey, QuantileTable, SampleSize};
use super::{coord, evaluate_methods, replicate, Design, Sampler, ScaleConvention};
use crate::error::{Error, Result};
use crate::hermite::are_lrd;
use crate::rng::derive_seed;
use crate::stats::{Method, Mode, Sidedness};
use crate::transform::{break_index, Shift, Transform};

/// Source of a method's critical value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Calibration {
    /// Bridge-supremum quantile (Hermite scale only).
    Asymptotic,
    /// Null quantile at the cell's sample size.
    FiniteSample,
}

impl Calibration {
    pub fn name(&self) -> &'static str {
        match self {
            Calibration::Asymptotic => "asymptotic",
            Calibration::FiniteSample => "finite-sample",
        }
    }
}

impl std::str::FromStr for Calibration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "asymptotic" => Ok(Calibration::Asymptotic),
            "finite-sample" | "finite" => Ok(Calibration::FiniteSample),
            other => Err(Error::Parse(format!("unknown calibration '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PowerStudyConfig {
    pub sample_sizes: Vec<usize>,
    pub taus: Vec<f64>,
    pub shifts: Vec<Shift>,
    pub transform: Transform,
    pub mode: Mode,
    pub reps: usize,
    pub alpha: f64,
    /// Methods with their critical-value source.
    pub methods: Vec<(Method, Calibration)>,
    pub sidedness: Sidedness,
    pub scale: ScaleConvention,
    pub seed: u64,
}

impl PowerStudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be ≥ 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1); got {}",
                self.alpha
            )));
        }
        if let Some(t) = self.taus.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::InvalidParameter(format!("tau must lie in [0, 1]; got {t}")));
        }
        if let Some(n) = self.sample_sizes.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidLength(format!("n must be ≥ 2; got {n}")));
        }
        if self.methods.is_empty() || self.sample_sizes.is_empty() || self.taus.is_empty() || self.shifts.is_empty() {
            return Err(Error::InvalidParameter("power study grid is empty".into()));
        }
        for (m, c) in &self.methods {
            if *c == Calibration::Asymptotic && self.scale == ScaleConvention::Unit && self.mode != Mode::Iid {
                return Err(Error::InvalidParameter(format!(
                    "asymptotic calibration of {} needs the hermite scale",
                    m.name()
                )));
            }
        }
        Ok(())
    }

    pub fn hurst(&self) -> f64 {
        match self.mode {
            Mode::Lrd(spec) => spec.hurst(),
            Mode::Iid => 0.5,
        }
    }

    /// Critical-value key for `method` at sample size `n`.
    pub fn quantile_key(&self, method: Method, calibration: Calibration, n: usize) -> QuantileKey {
        let (sample_size, transform) = match calibration {
            Calibration::Asymptotic => (SampleSize::Asymptotic, "*".to_string()),
            Calibration::FiniteSample => (SampleSize::Finite(n), self.transform.name().to_string()),
        };
        QuantileKey {
            alpha: self.alpha,
            hurst: self.hurst(),
            sample_size,
            sidedness: self.sidedness,
            method,
            transform,
            scale: self.scale,
        }
    }

    /// Every key a run needs, deduplicated.
    pub fn required_keys(&self) -> Vec<QuantileKey> {
        let mut keys: Vec<QuantileKey> = Vec::new();
        for &n in &self.sample_sizes {
            for &(m, c) in &self.methods {
                let k = self.quantile_key(m, c, n);
                if !keys.contains(&k) {
                    keys.push(k);
                }
            }
        }
        keys
    }
}

/// One (n, τ, shift, method) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCell {
    pub n: usize,
    pub tau: f64,
    pub break_index: usize,
    pub shift: Shift,
    /// Resolved absolute shift h.
    pub h: f64,
    pub method: Method,
    pub calibration: Calibration,
    pub critical_value: f64,
    pub rejection_count: usize,
    pub reps: usize,
    pub power: f64,
    pub std_error: f64,
}

impl PowerCell {
    fn new(
        coords: (usize, f64, Shift, f64),
        method: Method,
        calibration: Calibration,
        critical_value: f64,
        count: usize,
        reps: usize,
    ) -> Self {
        let (n, tau, shift, h) = coords;
        let power = count as f64 / reps as f64;
        Self {
            n,
            tau,
            break_index: break_index(n, tau),
            shift,
            h,
            method,
            calibration,
            critical_value,
            rejection_count: count,
            reps,
            power,
            std_error: (power * (1.0 - power) / reps as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerTable {
    pub schema: u32,
    pub transform: String,
    pub hurst: f64,
    pub alpha: f64,
    pub sidedness: Sidedness,
    pub scale: ScaleConvention,
    pub reps: usize,
    pub seed: u64,
    pub cells: Vec<PowerCell>,
}

impl PowerTable {
    pub fn find(&self, n: usize, tau: f64, h: f64, method: Method) -> Option<&PowerCell> {
        self.cells
            .iter()
            .find(|c| c.n == n && (c.tau - tau).abs() < 1e-12 && (c.h - h).abs() < 1e-12 && c.method == method)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "schema",
            "transform",
            "hurst",
            "alpha",
            "sidedness",
            "scale",
            "seed",
            "n",
            "tau",
            "break_index",
            "shift_kind",
            "shift_value",
            "h",
            "method",
            "calibration",
            "critical_value",
            "rejection_count",
            "reps",
            "power",
            "std_error",
        ])
        .map_err(csv_err)?;
        for c in &self.cells {
            let (kind, value) = match c.shift {
                Shift::Absolute(h) => ("absolute", h),
                Shift::Constant(v) => ("constant", v),
            };
            w.write_record([
                self.schema.to_string(),
                self.transform.clone(),
                self.hurst.to_string(),
                self.alpha.to_string(),
                self.sidedness.name().to_string(),
                self.scale.name().to_string(),
                self.seed.to_string(),
                c.n.to_string(),
                c.tau.to_string(),
                c.break_index.to_string(),
                kind.to_string(),
                value.to_string(),
                c.h.to_string(),
                c.method.name().to_string(),
                c.calibration.name().to_string(),
                c.critical_value.to_string(),
                c.rejection_count.to_string(),
                c.reps.to_string(),
                c.power.to_string(),
                c.std_error.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

fn mode_d(mode: Mode) -> f64 {
    match mode {
        Mode::Lrd(spec) => spec.d(),
        Mode::Iid => 1.0,
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn shift_coords(shift: Shift) -> [u64; 2] {
    match shift {
        Shift::Absolute(h) => [0, coord(h)],
        Shift::Constant(c) => [1, coord(c)],
    }
}

/// Estimates the power of every configured method in every (n, τ, shift) cell.
///
/// All methods of a cell see the same simulated series.
pub fn run_power_study(config: &PowerStudyConfig, quantiles: &QuantileTable) -> Result<PowerTable> {
    config.validate()?;
    let mut criticals = Vec::new();
    for key in config.required_keys() {
        criticals.push((key.clone(), quantiles.require(&key)?));
    }
    let critical = |m: Method, c: Calibration, n: usize| -> f64 {
        let key = config.quantile_key(m, c, n);
        criticals
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .expect("checked above")
    };

    let mut cells = Vec::new();
    for &n in &config.sample_sizes {
        let design = Design::new(n, config.mode, config.transform.clone())?
            .with_sidedness(config.sidedness)
            .with_scale(config.scale);
        let sampler = Sampler::new(&design)?;
        let norms = config
            .methods
            .iter()
            .map(|&(m, _)| design.normalization(m).map(|norm| (m, norm)))
            .collect::<Result<Vec<_>>>()?;
        let thresholds: Vec<f64> = config.methods.iter().map(|&(m, c)| critical(m, c, n)).collect();
        for &tau in &config.taus {
            for &shift in &config.shifts {
                let h = match shift {
                    Shift::Absolute(h) => h,
                    Shift::Constant(c) => c * (n as f64).powf(-design.d() / 2.0),
                };
                let [kind, value] = shift_coords(shift);
                let base = derive_seed(config.seed, &[n as u64, coord(tau), kind, value]);
                let outcomes = replicate(
                    &sampler,
                    config.reps,
                    |p| derive_seed(base, &[p]),
                    |x| evaluate_methods(x, tau, h, &norms, config.sidedness),
                );
                let mut counts = vec![0usize; norms.len()];
                for stats in outcomes {
                    for (c, (s, t)) in counts.iter_mut().zip(stats?.iter().zip(&thresholds)) {
                        *c += usize::from(s >= t);
                    }
                }
                for (i, &(m, cal)) in config.methods.iter().enumerate() {
                    cells.push(PowerCell::new(
                        (n, tau, shift, h),
                        m,
                        cal,
                        thresholds[i],
                        counts[i],
                        config.reps,
                    ));
                }
            }
        }
    }
    Ok(PowerTable {
        schema: super::QUANTILE_SCHEMA,
        transform: config.transform.name().to_string(),
        hurst: config.hurst(),
        alpha: config.alpha,
        sidedness: config.sidedness,
        scale: config.scale,
        reps: config.reps,
        seed: config.seed,
        cells,
    })
}

/// Absolute shift applied in a matched pair; both tests always see the same h.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchedShift {
    /// h = c_W·n_W^{−D/2} for Wilcoxon and h = shift_ratio·c_W·n_C^{−D/2} for CUSUM.
    Calibrated,
    /// h = c_W·n_C^{−D/2} for both tests, smaller than `Calibrated` by the shift ratio.
    CusumSize,
}

/// Matched-sample-size comparison: Wilcoxon at n_W against CUSUM at
/// n_C = round(ARE·n_W).
#[derive(Clone, Debug)]
pub struct MatchedConfig {
    pub c_w: Vec<f64>,
    pub taus: Vec<f64>,
    pub n_w: Vec<usize>,
    pub hurst: f64,
    pub transform: Transform,
    pub reps: usize,
    pub alpha: f64,
    pub sidedness: Sidedness,
    pub shift: MatchedShift,
    pub seed: u64,
}

impl MatchedConfig {
    /// ARE, shift ratio and the CUSUM sample sizes.
    pub fn plan(&self) -> Result<(f64, f64, Vec<usize>)> {
        let design = Design::lrd(2, self.hurst, self.transform.clone())?;
        let summary = design.summary();
        let are = are_lrd(summary, design.d())?;
        let n_c = self
            .n_w
            .iter()
            .map(|&n| (are.value * n as f64).round() as usize)
            .collect();
        Ok((are.value, summary.shift_ratio, n_c))
    }

    /// Quantile keys the study reads: CUSUM finite-sample at each n_C and the
    /// Wilcoxon asymptotic value, both on the Hermite scale.
    pub fn required_keys(&self) -> Result<Vec<QuantileKey>> {
        let (_, _, n_c) = self.plan()?;
        let mut keys = vec![QuantileKey {
            alpha: self.alpha,
            hurst: self.hurst,
            sample_size: SampleSize::Asymptotic,
            sidedness: self.sidedness,
            method: Method::Wilcoxon,
            transform: "*".into(),
            scale: ScaleConvention::Hermite,
        }];
        for n in n_c {
            keys.push(QuantileKey {
                alpha: self.alpha,
                hurst: self.hurst,
                sample_size: SampleSize::Finite(n),
                sidedness: self.sidedness,
                method: Method::Cusum,
                transform: self.transform.name().to_string(),
                scale: ScaleConvention::Hermite,
            });
        }
        Ok(keys)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchedRow {
    pub c_w: f64,
    pub tau: f64,
    pub n_w: usize,
    pub n_c: usize,
    pub wilcoxon: PowerCell,
    pub cusum: PowerCell,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchedStudy {
    pub are: f64,
    pub shift_ratio: f64,
    pub rows: Vec<MatchedRow>,
}

pub fn matched_are_study(config: &MatchedConfig, quantiles: &QuantileTable) -> Result<MatchedStudy> {
    let (are, shift_ratio, n_c) = config.plan()?;
    for key in config.required_keys()? {
        quantiles.require(&key)?;
    }
    let mode = Mode::Lrd(crate::fgn::LrdSpec::new(config.hurst)?);
    let study = |n: Vec<usize>, shifts: Vec<Shift>, method: Method, calibration: Calibration, seed: u64| {
        run_power_study(
            &PowerStudyConfig {
                sample_sizes: n,
                taus: config.taus.clone(),
                shifts,
                transform: config.transform.clone(),
                mode,
                reps: config.reps,
                alpha: config.alpha,
                methods: vec![(method, calibration)],
                sidedness: config.sidedness,
                scale: ScaleConvention::Hermite,
                seed,
            },
            quantiles,
        )
    };
    let d = mode_d(mode);
    let shift_for = |c_w: f64, n_c: usize, cusum: bool| -> Shift {
        match (config.shift, cusum) {
            (MatchedShift::Calibrated, false) => Shift::Constant(c_w),
            (MatchedShift::Calibrated, true) => Shift::Constant(shift_ratio * c_w),
            (MatchedShift::CusumSize, _) => Shift::Absolute(c_w * (n_c as f64).powf(-d / 2.0)),
        }
    };
    let mut rows = Vec::new();
    for (i, (&nw, &nc)) in config.n_w.iter().zip(&n_c).enumerate() {
        let w_shifts: Vec<Shift> = config.c_w.iter().map(|&c| shift_for(c, nc, false)).collect();
        let c_shifts: Vec<Shift> = config.c_w.iter().map(|&c| shift_for(c, nc, true)).collect();
        let wil = study(
            vec![nw],
            w_shifts.clone(),
            Method::Wilcoxon,
            Calibration::Asymptotic,
            derive_seed(config.seed, &[0, i as u64]),
        )?;
        let cus = study(
            vec![nc],
            c_shifts.clone(),
            Method::Cusum,
            Calibration::FiniteSample,
            derive_seed(config.seed, &[1, i as u64]),
        )?;
        for (j, &c_w) in config.c_w.iter().enumerate() {
            for &tau in &config.taus {
                let pick = |t: &PowerTable, shift: Shift| {
                    t.cells
                        .iter()
                        .find(|cell| (cell.tau - tau).abs() < 1e-12 && cell.shift == shift)
                        .cloned()
                        .expect("cell present")
                };
                rows.push(MatchedRow {
                    c_w,
                    tau,
                    n_w: nw,
                    n_c: nc,
                    wilcoxon: pick(&wil, w_shifts[j]),
                    cusum: pick(&cus, c_shifts[j]),
                });
            }
        }
    }
    rows.sort_by(|a, b| {
        a.c_w
            .total_cmp(&b.c_w)
            .then(a.tau.total_cmp(&b.tau))
            .then(a.n_w.cmp(&b.n_w))
    });
    Ok(MatchedStudy { are, shift_ratio, rows })
}
