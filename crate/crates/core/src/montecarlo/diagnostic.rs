//! Limiting power curve ψ(t) = P(sup_λ (B_H(λ) − λB_H(1) + t·φ_τ(λ)) > q_α)
//! and its generalized inverse ψ⁻(β) = inf{t ≥ 0 : ψ(t) ≥ β}.
//!
//! On each simulated bridge b the supremum exceeds q exactly when
//! t > t* = min_{φ(λ)>0} (q − b(λ))/φ(λ), so ψ is the empirical CDF of the
//! thresholds t* and ψ⁻ is one of their order statistics.

use serde::Serialize;

use super::quantile::{upper_quantile, upper_quantile_index};
use super::{coord, replicate, Sampler};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PsiPoint {
    pub t: f64,
    pub psi: f64,
}

#[derive(Clone, Debug)]
pub struct PsiCurve {
    tau: f64,
    critical: f64,
    thresholds: Vec<f64>,
}

/// φ_τ(λ) = λ(1−τ) for λ ≤ τ and τ(1−λ) beyond.
pub fn phi(tau: f64, lambda: f64) -> f64 {
    if lambda <= tau {
        lambda * (1.0 - tau)
    } else {
        tau * (1.0 - lambda)
    }
}

impl PsiCurve {
    /// One-sided curve at break fraction `tau`; q_α is the upper-α quantile
    /// of the same simulated suprema.
    pub fn simulate(hurst: f64, tau: f64, alpha: f64, grid_n: usize, reps: usize, seed: u64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidParameter(format!("tau must lie in (0, 1); got {tau}")));
        }
        upper_quantile_index(alpha, reps)?;
        let sampler = Sampler::fgn(grid_n, hurst)?;
        let scale = (grid_n as f64).powf(-hurst);
        let base = derive_seed(seed, &[coord(hurst), grid_n as u64, 3]);
        let bridges: Vec<Vec<f64>> = replicate(
            &sampler,
            reps,
            |p| derive_seed(base, &[p]),
            |x| {
                let total: f64 = x.iter().sum();
                let n = x.len() as f64;
                let mut s = 0.0;
                x.iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        s += v;
                        scale * (s - (i + 1) as f64 / n * total)
                    })
                    .collect()
            },
        );
        let sups: Vec<f64> = bridges.iter().map(|b| b.iter().copied().fold(0.0, f64::max)).collect();
        let critical = upper_quantile(&sups, alpha)?;
        let n = grid_n as f64;
        let thresholds = bridges
            .iter()
            .map(|b| {
                b.iter()
                    .enumerate()
                    .filter_map(|(i, &v)| {
                        let w = phi(tau, (i + 1) as f64 / n);
                        (w > 0.0).then(|| (critical - v) / w)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect::<Vec<_>>();
        let mut thresholds = thresholds;
        thresholds.sort_unstable_by(f64::total_cmp);
        Ok(Self {
            tau,
            critical,
            thresholds,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn critical_value(&self) -> f64 {
        self.critical
    }

    /// Empirical ψ(t).
    pub fn psi(&self, t: f64) -> f64 {
        let below = self.thresholds.partition_point(|&x| x < t);
        below as f64 / self.thresholds.len() as f64
    }

    /// ψ⁻(β) for β in (0, 1].
    pub fn psi_inverse(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1]; got {beta}")));
        }
        let m = ((beta * self.thresholds.len() as f64) - 1e-9).ceil().max(1.0) as usize;
        Ok(self.thresholds[m - 1].max(0.0))
    }

    pub fn curve(&self, ts: &[f64]) -> Vec<PsiPoint> {
        ts.iter().map(|&t| PsiPoint { t, psi: self.psi(t) }).collect()
    }
}
