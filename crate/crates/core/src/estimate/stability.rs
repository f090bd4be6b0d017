use serde::{Deserialize, Serialize};

use super::DEGENERATE_REL;
use crate::error::{DarwinError, Result};
use crate::numeric::{mean, KahanSum};
use crate::process::Observations;
use crate::theory::stats::{normal_cdf, normal_quantile};

/// Lyapunov-exponent estimate and the stability statistic `T_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub gamma_hat: f64,
    pub sigma2_hat: f64,
    pub t_stat: f64,
    /// Two-sided, `2(1 - Φ(|T_n|))`.
    pub p_value: f64,
    pub n: usize,
}

impl StabilityReport {
    /// Two-sided rejection of `γ₀ = 0` at level `beta`: `|T_n| > Φ⁻¹(1 - β/2)`.
    pub fn rejects(&self, beta: f64) -> Result<bool> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(DarwinError::InvalidArgument(format!("level {beta} outside (0, 1]")));
        }
        Ok(self.t_stat.abs() > normal_quantile(1.0 - beta / 2.0)?)
    }
}

pub fn lyapunov_estimate<O: Observations + ?Sized>(obs: &O) -> Result<StabilityReport> {
    lyapunov_estimate_from_logs(&obs.log_abs_ratios()?)
}

/// Same as [`lyapunov_estimate`] given `log|y_t / y_{t-1}|` directly.
pub fn lyapunov_estimate_from_logs(logs: &[f64]) -> Result<StabilityReport> {
    let n = logs.len();
    if n < 2 {
        return Err(DarwinError::InvalidArgument("stability test needs at least two transitions".into()));
    }
    if let Some(i) = logs.iter().position(|v| !v.is_finite()) {
        return Err(DarwinError::NonFinite { index: i + 1 });
    }
    let gamma_hat = mean(logs);
    let ss: KahanSum = logs.iter().map(|l| (l - gamma_hat) * (l - gamma_hat)).collect();
    let sigma2_hat = ss.value() / n as f64;
    let scale = logs.iter().map(|l| l * l).sum::<f64>() / n as f64;
    if sigma2_hat <= DEGENERATE_REL * (1.0 + scale) {
        return Err(DarwinError::Degenerate("all log-ratios identical; sigma2_hat = 0"));
    }
    let t_stat = (n as f64).sqrt() * gamma_hat / sigma2_hat.sqrt();
    Ok(StabilityReport { gamma_hat, sigma2_hat, t_stat, p_value: 2.0 * normal_cdf(-t_stat.abs()), n })
}

/// `(log|y_n| - log|y_0|) / n`.
pub fn telescoped_gamma<O: Observations + ?Sized>(obs: &O) -> f64 {
    let l = obs.log_levels();
    (l[l.len() - 1] - l[0]) / obs.n() as f64
}
