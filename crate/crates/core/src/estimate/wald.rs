use serde::{Deserialize, Serialize};

use super::QmleFit;
use crate::error::{DarwinError, Result};
use crate::theory::stats::chi2_sf;

/// Wald test of `Γ θ = r` with `s` linear restrictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldReport {
    pub w_stat: f64,
    pub df: usize,
    pub p_value: f64,
    pub gamma: Vec<[f64; 2]>,
    pub r: Vec<f64>,
}

/// `W_n = n (Γθ̂ - r)ᵀ (Γ Σ̂ Γᵀ)⁻¹ (Γθ̂ - r)` against `χ²_s`.
pub fn wald_test(fit: &QmleFit, gamma: &[[f64; 2]], r: &[f64]) -> Result<WaldReport> {
    let s = gamma.len();
    if !(1..=2).contains(&s) || r.len() != s {
        return Err(DarwinError::InvalidArgument(format!(
            "Gamma must have 1 or 2 rows matching r (got {s} rows, {} values)",
            r.len()
        )));
    }
    let rank_ok = match s {
        1 => gamma[0] != [0.0, 0.0],
        _ => {
            let det = gamma[0][0] * gamma[1][1] - gamma[0][1] * gamma[1][0];
            let scale = gamma.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
            det.abs() > 1e-12 * scale * scale
        }
    };
    if !rank_ok {
        return Err(DarwinError::Singular("Gamma is rank deficient"));
    }
    let sig = fit.sigma_matrix;
    let theta = fit.theta();
    // M = Γ Σ̂ Γᵀ, d = Γ θ̂ - r
    let m = |i: usize, j: usize| {
        (0..2).map(|k| (0..2).map(|l| gamma[i][k] * sig[k][l] * gamma[j][l]).sum::<f64>()).sum::<f64>()
    };
    let d: Vec<f64> = (0..s).map(|i| gamma[i][0] * theta[0] + gamma[i][1] * theta[1] - r[i]).collect();
    let w = if s == 1 {
        let m11 = m(0, 0);
        if !(m11 > 0.0) {
            return Err(DarwinError::Singular("Gamma Sigma Gamma^T is singular"));
        }
        d[0] * d[0] / m11
    } else {
        let (a, b, c) = (m(0, 0), m(0, 1), m(1, 1));
        let det = a * c - b * b;
        if !(det > 1e-14 * a.abs().max(c.abs()).powi(2)) {
            return Err(DarwinError::Singular("Gamma Sigma Gamma^T is singular"));
        }
        (c * d[0] * d[0] - 2.0 * b * d[0] * d[1] + a * d[1] * d[1]) / det
    };
    let w_stat = fit.n as f64 * w;
    Ok(WaldReport { w_stat, df: s, p_value: chi2_sf(w_stat, s)?, gamma: gamma.to_vec(), r: r.to_vec() })
}
