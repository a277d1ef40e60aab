//! Study files for `lrdcp power`.
//!
//! One `key = value` per line; `#` starts a comment. Grid keys may repeat
//! (or take comma-separated values) and every combination is simulated:
//!
//! ```text
//! n = 2000
//! tau = 0.05, 0.1, 0.3, 0.5
//! shift = 0.5                # absolute h
//! shift-constant = 1         # h = c·n^{-D/2}
//! method = cusum             # asymptotic critical value
//! method = wilcoxon finite-sample
//! ```
//!
//! Scalar keys: hurst (LRD, default 0.7), mode (lrd | iid), transform,
//! reps, alpha, sidedness, scale, seed. A scalar key may appear once.

use std::collections::HashSet;

use lrd_changepoint::fgn::LrdSpec;
use lrd_changepoint::montecarlo::{Calibration, PowerStudyConfig, ScaleConvention};
use lrd_changepoint::{Method, Mode, Shift, Sidedness, Transform};

use crate::exit::{CliError, CliResult};

const GRID_KEYS: [&str; 5] = ["n", "tau", "shift", "shift-constant", "method"];
const SCALAR_KEYS: [&str; 8] = [
    "hurst",
    "mode",
    "transform",
    "reps",
    "alpha",
    "sidedness",
    "scale",
    "seed",
];

fn bad(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::input(format!("study line {line}: {msg}"))
}

fn num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> CliResult<T> {
    v.parse().map_err(|_| bad(line, format!("bad value '{v}' for {key}")))
}

/// Parses a study; `default_seed` applies when the file sets no seed.
pub fn parse(text: &str, default_seed: u64) -> CliResult<PowerStudyConfig> {
    let mut sizes = Vec::new();
    let mut taus = Vec::new();
    let mut shifts = Vec::new();
    let mut methods = Vec::new();
    let mut seen = HashSet::new();
    let mut hurst = 0.7;
    let mut iid = false;
    let mut transform = Transform::gaussian();
    let mut reps = 10_000usize;
    let mut alpha = 0.05;
    let mut sidedness = Sidedness::TwoSided;
    let mut scale = ScaleConvention::Hermite;
    let mut seed = default_seed;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| bad(line, format!("expected key = value, got '{content}'")))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        if value.is_empty() {
            return Err(bad(line, format!("empty value for {key}")));
        }
        if GRID_KEYS.contains(&key.as_str()) {
            for v in value.split(',').map(str::trim) {
                match key.as_str() {
                    "n" => sizes.push(num::<usize>(line, &key, v)?),
                    "tau" => taus.push(num::<f64>(line, &key, v)?),
                    "shift" => shifts.push(Shift::Absolute(num(line, &key, v)?)),
                    "shift-constant" => shifts.push(Shift::Constant(num(line, &key, v)?)),
                    _ => {
                        let mut parts = v.split_whitespace();
                        let m: Method = parts.next().unwrap_or("").parse().map_err(|e| bad(line, e))?;
                        let c = match parts.next() {
                            Some(c) => c.parse().map_err(|e| bad(line, e))?,
                            None => Calibration::Asymptotic,
                        };
                        if parts.next().is_some() {
                            return Err(bad(
                                line,
                                format!("expected 'method = <name> [calibration]', got '{v}'"),
                            ));
                        }
                        methods.push((m, c));
                    }
                }
            }
            continue;
        }
        if !SCALAR_KEYS.contains(&key.as_str()) {
            return Err(bad(line, format!("unknown key '{key}'")));
        }
        if !seen.insert(key.clone()) {
            return Err(bad(line, format!("'{key}' may appear only once")));
        }
        match key.as_str() {
            "hurst" => hurst = num(line, &key, value)?,
            "mode" => {
                iid = match value.to_ascii_lowercase().as_str() {
                    "lrd" => false,
                    "iid" => true,
                    other => return Err(bad(line, format!("unknown mode '{other}'"))),
                }
            }
            "transform" => transform = Transform::from_name(value).map_err(|e| bad(line, e))?,
            "reps" => reps = num(line, &key, value)?,
            "alpha" => alpha = num(line, &key, value)?,
            "sidedness" => sidedness = value.parse().map_err(|e| bad(line, e))?,
            "scale" => scale = value.parse().map_err(|e| bad(line, e))?,
            _ => seed = num(line, &key, value)?,
        }
    }
    if shifts.is_empty() {
        shifts.push(Shift::Absolute(0.0));
    }
    if taus.is_empty() {
        taus.push(0.5);
    }
    if methods.is_empty() {
        methods = vec![
            (Method::Cusum, Calibration::Asymptotic),
            (Method::Wilcoxon, Calibration::Asymptotic),
        ];
    }
    let mode = if iid {
        Mode::Iid
    } else {
        Mode::Lrd(LrdSpec::new(hurst).map_err(|e| CliError::input(format!("study: {e}")))?)
    };
    let config = PowerStudyConfig {
        sample_sizes: sizes,
        taus,
        shifts,
        transform,
        mode,
        reps,
        alpha,
        methods,
        sidedness,
        scale,
        seed,
    };
    config.validate().map_err(|e| CliError::input(format!("study: {e}")))?;
    Ok(config)
}
