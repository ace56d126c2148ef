//! Closed-form thresholds and leading-order expectations.
//!
//! All logarithms are natural. Thresholds are returned as reals; callers
//! round them to test counts.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::model::infected_count_from_theta;

/// Test-count thresholds at `(n, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryThresholds {
    pub n: usize,
    pub k: usize,
    pub theta: f64,
    /// Information-theoretic threshold of the random regular design.
    pub m_inf: f64,
    /// Threshold above which DD and SCOMP succeed.
    pub m_alg: f64,
    /// Adaptive threshold `k ln(n/k) / ln 2`.
    pub m_adaptive: f64,
    /// `log2 C(n, k)`: tests needed so that `2^m` outcomes can separate all configurations.
    pub counting_bound: f64,
}

/// `k ln(n/k) / m_inf = min{ln 2, ((1-theta)/theta) ln^2 2}`.
pub fn rate_inf(theta: f64) -> f64 {
    LN_2.min((1.0 - theta) / theta * LN_2 * LN_2)
}

/// `k ln(n/k) / m_alg = min{ln^2 2, ((1-theta)/theta) ln^2 2}`.
pub fn rate_alg(theta: f64) -> f64 {
    (LN_2 * LN_2).min((1.0 - theta) / theta * LN_2 * LN_2)
}

/// `ln C(n, k)` by a direct sum of logarithms.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return param(format!("theta = {theta} must lie in (0, 1)"));
    }
    Ok(())
}

/// Thresholds with `k = round(n^theta)`.
pub fn thresholds(n: usize, theta: f64) -> Result<TheoryThresholds> {
    check_theta(theta)?;
    if n < 2 {
        return param("thresholds need n >= 2");
    }
    let k = infected_count_from_theta(n, theta)?;
    thresholds_for(n, k, theta)
}

/// Thresholds for an explicit `k`, with `theta` used in the rate functions.
pub fn thresholds_for(n: usize, k: usize, theta: f64) -> Result<TheoryThresholds> {
    check_theta(theta)?;
    if k == 0 || k >= n {
        return param(format!("thresholds need 1 <= k < n, got k = {k}, n = {n}"));
    }
    let info = k as f64 * (n as f64 / k as f64).ln();
    Ok(TheoryThresholds {
        n,
        k,
        theta,
        m_inf: info / rate_inf(theta),
        m_alg: info / rate_alg(theta),
        m_adaptive: info / LN_2,
        counting_bound: ln_binomial(n, k) / LN_2,
    })
}

/// Sparsity exponent implied by an explicit `k`: `ln k / ln n`.
pub fn theta_of(n: usize, k: usize) -> Result<f64> {
    if n < 2 || k < 2 || k >= n {
        return param(format!("cannot infer theta from n = {n}, k = {k}"));
    }
    Ok((k as f64).ln() / (n as f64).ln())
}

/// `ceil((m/k) ln 2)`, at least 1: the `Δ` that balances positive and negative tests.
pub fn optimal_delta(m: usize, k: usize) -> Result<usize> {
    if k == 0 {
        return param("optimal_delta needs k >= 1");
    }
    if m == 0 {
        return param("optimal_delta needs m >= 1");
    }
    Ok(((m as f64 / k as f64) * LN_2).ceil().max(1.0) as usize)
}

/// Leading-order predictions for `(n, k, m, Δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPredictions {
    /// `m / (k ln(n/k))`
    pub c: f64,
    /// `Δ / ln(n/k)`
    pub d: f64,
    /// Expected negative tests, `m e^{-d/c}`.
    pub e_m0: f64,
    /// Expected potential false positives, `n (1 - e^{-d/c})^Δ`.
    pub e_v0_plus: f64,
    /// Expected potential false negatives, `k (1 - e^{-d/c})^Δ`.
    pub e_v1_plus: f64,
    /// Expected tests with a single infected edge, `kΔ e^{-d/c}`.
    pub e_w: f64,
    /// `Δn/m`
    pub gamma_center: f64,
    /// `sqrt(Δn/m) ln n`
    pub gamma_halfwidth: f64,
}

impl TheoryPredictions {
    /// `d/c = Δk/m`.
    pub fn d_over_c(&self) -> f64 {
        self.d / self.c
    }
}

pub fn predictions(n: usize, k: usize, m: usize, delta: usize) -> Result<TheoryPredictions> {
    if n == 0 || k == 0 || m == 0 || delta == 0 {
        return param("predictions need positive n, k, m, delta");
    }
    if k >= n {
        return param(format!("predictions need k < n, got k = {k}, n = {n}"));
    }
    let (nf, kf, mf, df) = (n as f64, k as f64, m as f64, delta as f64);
    let log_ratio = (nf / kf).ln();
    let c = mf / (kf * log_ratio);
    let d = df / log_ratio;
    let negative = (-df * kf / mf).exp();
    let all_positive = (1.0 - negative).powf(df);
    let gamma_center = df * nf / mf;
    Ok(TheoryPredictions {
        c,
        d,
        e_m0: mf * negative,
        e_v0_plus: nf * all_positive,
        e_v1_plus: kf * all_positive,
        e_w: kf * df * negative,
        gamma_center,
        gamma_halfwidth: gamma_center.sqrt() * nf.ln(),
    })
}

/// One row of the threshold-rate table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub theta: f64,
    pub rate_inf: f64,
    pub rate_alg: f64,
}

pub fn rate_curves(theta_grid: &[f64]) -> Result<Vec<RatePoint>> {
    theta_grid
        .iter()
        .map(|&theta| {
            check_theta(theta)?;
            Ok(RatePoint { theta, rate_inf: rate_inf(theta), rate_alg: rate_alg(theta) })
        })
        .collect()
}

/// `0.05, 0.06, ..., 0.95`.
pub fn default_theta_grid() -> Vec<f64> {
    (5..=95).map(|i| i as f64 / 100.0).collect()
}
