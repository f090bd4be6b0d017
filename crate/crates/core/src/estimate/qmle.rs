use serde::{Deserialize, Serialize};

use super::DEGENERATE_REL;
use crate::error::{DarwinError, Result};
use crate::numeric::{mean, KahanSum};
use crate::process::Observations;

/// Closed-form quasi-maximum likelihood fit of `(φ, α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QmleFit {
    pub phi_hat: f64,
    pub alpha_hat: f64,
    /// `n/(n-1) · α̂`, the unbiased rescaling.
    pub alpha_star: f64,
    /// `mean(η̂⁴)`.
    pub kappa_hat: f64,
    /// `diag(α̂, (κ̂ - 1) α̂²)`.
    pub sigma_matrix: [[f64; 2]; 2],
    pub se_phi: f64,
    pub se_alpha: f64,
    /// `(r_t - φ̂)/√α̂`. Sums to zero and has unit mean square.
    pub residuals: Vec<f64>,
    /// `sign(y_{t-1}) · residuals[t]`, the estimate of the innovation `η_t`
    /// itself. Identical to `residuals` when every lagged level is positive.
    pub innovations: Vec<f64>,
    pub n: usize,
}

impl QmleFit {
    pub fn theta(&self) -> [f64; 2] {
        [self.phi_hat, self.alpha_hat]
    }

    /// Standard errors from `(α̂, κ̂, n)`.
    pub fn standard_errors(alpha_hat: f64, kappa_hat: f64, n: usize) -> (f64, f64) {
        let n = n as f64;
        ((alpha_hat / n).sqrt(), ((kappa_hat - 1.0) * alpha_hat * alpha_hat / n).sqrt())
    }
}

pub fn qmle_fit<O: Observations + ?Sized>(obs: &O) -> Result<QmleFit> {
    let n = obs.n();
    if n < 2 {
        return Err(DarwinError::InvalidArgument("QMLE needs at least three observations".into()));
    }
    let ratios = obs.ratios()?;
    if let Some(i) = ratios.iter().position(|v| !v.is_finite()) {
        return Err(DarwinError::NonFinite { index: i + 1 });
    }
    let phi_hat = mean(&ratios);
    let dev: Vec<f64> = ratios.iter().map(|r| r - phi_hat).collect();
    let alpha_hat = dev.iter().map(|d| d * d).collect::<KahanSum>().value() / n as f64;
    let scale = ratios.iter().map(|r| r * r).sum::<f64>() / n as f64;
    if alpha_hat <= DEGENERATE_REL * (1.0 + scale) {
        return Err(DarwinError::Degenerate("all ratios identical; alpha_hat = 0"));
    }
    let root = alpha_hat.sqrt();
    let residuals: Vec<f64> = dev.iter().map(|d| d / root).collect();
    let innovations: Vec<f64> = residuals
        .iter()
        .zip(obs.lag_signs())
        .map(|(e, s)| e * f64::from(s))
        .collect();
    let kappa_hat = residuals.iter().map(|e| e.powi(4)).collect::<KahanSum>().value() / n as f64;
    let (se_phi, se_alpha) = QmleFit::standard_errors(alpha_hat, kappa_hat, n);
    Ok(QmleFit {
        phi_hat,
        alpha_hat,
        alpha_star: n as f64 / (n - 1) as f64 * alpha_hat,
        kappa_hat,
        sigma_matrix: [[alpha_hat, 0.0], [0.0, (kappa_hat - 1.0) * alpha_hat * alpha_hat]],
        se_phi,
        se_alpha,
        residuals,
        innovations,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PluginEstimate {
    pub value: f64,
    /// Terms with `φ̂ + η̂_t √α̂ = 0` exactly, left out of the average.
    pub skipped: usize,
}

/// `mean log|φ̂ + η̂_t √α̂|` over the fitted innovations. Point estimate only.
pub fn plugin_lyapunov(fit: &QmleFit) -> Result<PluginEstimate> {
    let root = fit.alpha_hat.sqrt();
    let mut acc = KahanSum::new();
    let mut used = 0usize;
    for e in &fit.innovations {
        let v = (fit.phi_hat + e * root).abs();
        if v == 0.0 {
            continue;
        }
        acc.add(v.ln());
        used += 1;
    }
    if used == 0 {
        return Err(DarwinError::Degenerate("every plug-in term vanished"));
    }
    Ok(PluginEstimate { value: acc.value() / used as f64, skipped: fit.innovations.len() - used })
}

/// Fitted log-volatility `log(α̂ y²_{t-1})`, `t = 1..n`.
pub fn log_volatility<O: Observations + ?Sized>(fit: &QmleFit, obs: &O) -> Vec<f64> {
    let la = fit.alpha_hat.ln();
    let levels = obs.log_levels();
    levels[..levels.len() - 1].iter().map(|l| la + 2.0 * l).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::Series;

    #[test]
    fn hand_example() {
        let s = Series::new(vec![1.0, 2.0, 1.0]).unwrap();
        let f = qmle_fit(&s).unwrap();
        assert_eq!(f.phi_hat, 1.25);
        assert_eq!(f.alpha_hat, 0.5625);
        assert_eq!(f.residuals, vec![1.0, -1.0]);
        assert_eq!(f.kappa_hat, 1.0);
        assert_eq!(f.alpha_star, 1.125);
        assert_eq!(f.sigma_matrix, [[0.5625, 0.0], [0.0, 0.0]]);
        assert_eq!(f.se_phi, (0.5625f64 / 2.0).sqrt());
        let p = plugin_lyapunov(&f).unwrap();
        assert!(p.value.abs() < 1e-15 && p.skipped == 0);
    }

    #[test]
    fn innovations_carry_lag_sign() {
        let s = Series::new(vec![1.0, -2.0, 1.0, 3.0]).unwrap();
        let f = qmle_fit(&s).unwrap();
        let signs = [1.0, -1.0, 1.0];
        for i in 0..3 {
            assert_eq!(f.innovations[i], f.residuals[i] * signs[i]);
        }
    }

    #[test]
    fn constant_ratios_are_degenerate() {
        let s = Series::new(vec![1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(matches!(qmle_fit(&s), Err(DarwinError::Degenerate(_))));
    }

    #[test]
    fn scaling_leaves_fit_unchanged() {
        let s = Series::new(vec![0.3, -1.2, 0.7, 2.2, -0.4]).unwrap();
        let a = qmle_fit(&s).unwrap();
        let b = qmle_fit(&s.scaled(-7.0).unwrap()).unwrap();
        assert!((a.phi_hat - b.phi_hat).abs() < 1e-12);
        assert!((a.alpha_hat - b.alpha_hat).abs() < 1e-12);
    }

    #[test]
    fn volatility_series() {
        let s = Series::new(vec![1.0, 2.0, 1.0]).unwrap();
        let f = qmle_fit(&s).unwrap();
        let v = log_volatility(&f, &s);
        assert!((v[0] - 0.5625f64.ln()).abs() < 1e-15);
        assert!((v[1] - (0.5625f64 * 4.0).ln()).abs() < 1e-14);
    }
}
