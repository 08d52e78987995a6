//! Smoothness measures for graph signals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GsiError, Result};
use crate::graph::{markov_matrix, Graph};

/// Vector norm order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Inf,
}

impl Norm {
    pub fn apply(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

impl FromStr for Norm {
    type Err = GsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "l1" => Ok(Norm::L1),
            "2" | "l2" => Ok(Norm::L2),
            "inf" | "max" => Ok(Norm::Inf),
            _ => Err(GsiError::InvalidParameter(format!("unknown norm '{s}' (expected 1, 2 or inf)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    TotalVariation,
    LaplacianQuadratic,
    MarkovVariation,
}

impl FromStr for Measure {
    type Err = GsiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tv" | "total_variation" => Ok(Measure::TotalVariation),
            "lq" | "laplacian_quadratic" => Ok(Measure::LaplacianQuadratic),
            "mv" | "markov_variation" => Ok(Measure::MarkovVariation),
            _ => Err(GsiError::InvalidParameter(format!(
                "unknown measure '{s}' (expected markov_variation, total_variation or laplacian_quadratic)"
            ))),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Measure::TotalVariation => "total_variation",
            Measure::LaplacianQuadratic => "laplacian_quadratic",
            Measure::MarkovVariation => "markov_variation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub measure: Measure,
    pub p: Norm,
    pub value: f64,
}

fn check_len(g: &Graph, s: &[f64]) -> Result<()> {
    if s.len() != g.n() {
        return Err(GsiError::DimensionMismatch {
            expected: g.n(),
            got: s.len(),
        });
    }
    Ok(())
}

fn residual_norm(s: &[f64], shifted: &[f64], p: Norm) -> f64 {
    let r: Vec<f64> = s.iter().zip(shifted).map(|(a, b)| a - b).collect();
    p.apply(&r)
}

/// `||s - P s||_p`.
pub fn markov_variation(g: &Graph, s: &[f64], p: Norm) -> Result<f64> {
    check_len(g, s)?;
    let shifted = markov_matrix(g)?.shift(s)?;
    Ok(residual_norm(s, &shifted, p))
}

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 10_000;

/// Spectral radius of the affinity matrix by power iteration on
/// `W + sigma I`, with `sigma` the largest degree so the Perron root dominates.
pub fn affinity_spectral_radius(g: &Graph) -> Result<f64> {
    let sigma = g.degrees().iter().copied().fold(0.0, f64::max);
    if sigma == 0.0 {
        return Err(GsiError::InvalidParameter("affinity matrix is all zero".into()));
    }
    let n = g.n();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut rho = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let wx = g.affinity().mul_vec(&x)?;
        let next_rho: f64 = x.iter().zip(&wx).map(|(a, b)| a * b).sum();
        let mut y: Vec<f64> = wx.iter().zip(&x).map(|(a, b)| a + sigma * b).collect();
        let norm = Norm::L2.apply(&y);
        y.iter_mut().for_each(|v| *v /= norm);
        x = y;
        if (next_rho - rho).abs() <= POWER_TOL * next_rho.abs().max(1.0) {
            return Ok(next_rho);
        }
        rho = next_rho;
    }
    log::warn!("power iteration did not converge within {POWER_MAX_ITER} iterations");
    Ok(rho)
}

/// `||s - W s / |lambda_max(W)| ||_p`.
pub fn total_variation(g: &Graph, s: &[f64], p: Norm) -> Result<f64> {
    check_len(g, s)?;
    let rho = affinity_spectral_radius(g)?;
    let ws = g.affinity().mul_vec(s)?;
    let shifted: Vec<f64> = ws.iter().map(|v| v / rho).collect();
    Ok(residual_norm(s, &shifted, p))
}

/// `s^T (D - W) s = 1/2 sum_i sum_m W_im (s_i - s_m)^2`.
pub fn laplacian_quadratic(g: &Graph, s: &[f64]) -> Result<f64> {
    check_len(g, s)?;
    let total: f64 = g
        .affinity()
        .triplets()
        .map(|(i, m, w)| w * (s[i] - s[m]).powi(2))
        .sum();
    Ok(0.5 * total)
}

/// Markov variation strictly below `eta`.
pub fn is_smooth(g: &Graph, s: &[f64], eta: f64, p: Norm) -> Result<bool> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(GsiError::InvalidParameter(format!("threshold {eta} must be positive")));
    }
    Ok(markov_variation(g, s, p)? < eta)
}

/// Threshold used for exact-recovery checks: `1e-8 N`.
pub fn default_eta(n: usize) -> f64 {
    1e-8 * n as f64
}

pub fn evaluate(g: &Graph, s: &[f64], measure: Measure, p: Norm) -> Result<SmoothnessReport> {
    let value = match measure {
        Measure::MarkovVariation => markov_variation(g, s, p)?,
        Measure::TotalVariation => total_variation(g, s, p)?,
        Measure::LaplacianQuadratic => laplacian_quadratic(g, s)?,
    };
    Ok(SmoothnessReport { measure, p, value })
}
