use serde::{Deserialize, Serialize};

use crate::error::{DarwinError, Result};
use crate::numeric::mean;

/// Sample ACF and PACF of fitted residuals (or their squares) at lags `1..=max_lag`.
/// No confidence bands are attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    pub squared: bool,
    pub acf: Vec<f64>,
    pub pacf: Vec<f64>,
}

pub fn residual_acf(residuals: &[f64], max_lag: usize, squared: bool) -> Result<AcfResult> {
    let n = residuals.len();
    if max_lag == 0 || 2 * max_lag > n {
        return Err(DarwinError::InvalidArgument(format!(
            "max_lag must be in 1..={} for {n} residuals",
            n / 2
        )));
    }
    let x: Vec<f64> = if squared {
        residuals.iter().map(|e| e * e).collect()
    } else {
        residuals.to_vec()
    };
    let m = mean(&x);
    let c: Vec<f64> = x.iter().map(|v| v - m).collect();
    let denom: f64 = c.iter().map(|v| v * v).sum();
    let scale: f64 = x.iter().map(|v| v * v).sum();
    if !(denom > 1e-24 * scale.max(f64::MIN_POSITIVE)) {
        return Err(DarwinError::Degenerate("residual variance is zero"));
    }
    let acf: Vec<f64> = (1..=max_lag)
        .map(|k| c[k..].iter().zip(&c[..n - k]).map(|(a, b)| a * b).sum::<f64>() / denom)
        .collect();
    Ok(AcfResult { squared, pacf: durbin_levinson(&acf), acf })
}

/// Partial autocorrelations from autocorrelations `rho[0..]` (lags 1, 2, ...).
fn durbin_levinson(rho: &[f64]) -> Vec<f64> {
    let mut pacf = Vec::with_capacity(rho.len());
    let mut phi: Vec<f64> = Vec::new();
    for k in 0..rho.len() {
        let num = rho[k] - (0..k).map(|j| phi[j] * rho[k - 1 - j]).sum::<f64>();
        let den = 1.0 - (0..k).map(|j| phi[j] * rho[j]).sum::<f64>();
        let a = if den.abs() > 0.0 { num / den } else { 0.0 };
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - a * prev[k - 1 - j];
        }
        phi.push(a);
        pacf.push(a);
    }
    pacf
}
