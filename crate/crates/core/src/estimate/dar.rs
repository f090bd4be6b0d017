//! Gaussian QMLE of the intercepted model `y_t = φ y_{t-1} + η_t sqrt(ω + α y²_{t-1})`,
//! used as a comparison fit. No closed form exists, so the likelihood is
//! maximized by Nelder-Mead in `(φ, log ω, log α)`.

use serde::{Deserialize, Serialize};

use super::simplex::{nelder_mead, SimplexOptions};
use crate::error::{DarwinError, Result};
use crate::numeric::{invert_dense, KahanSum};
use crate::process::{DarParams, Series};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DarFit {
    pub lambda_hat: DarParams,
    pub loglik: f64,
    pub loglik_init: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Sandwich standard errors of `(φ, ω, α)`; `None` when the numerical
    /// information matrix is not invertible (typically `ω̂` on the boundary).
    pub se: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy)]
pub struct DarFitOptions {
    pub simplex: SimplexOptions,
    /// Fresh simplex restarts from the incumbent optimum.
    pub restarts: usize,
}

impl Default for DarFitOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions { max_iter: 4000, f_tol: 1e-12, x_tol: 1e-7, initial_step: 0.2 },
            restarts: 2,
        }
    }
}

/// `Σ_t -½[log h_t + (y_t - φ y_{t-1})² / h_t]`, `h_t = ω + α y²_{t-1}`.
pub fn dar_loglik(series: &Series, params: DarParams) -> f64 {
    let y = series.values();
    let mut acc = KahanSum::new();
    for w in y.windows(2) {
        let h = params.omega + params.alpha * w[0] * w[0];
        if !(h > 0.0) {
            return f64::NEG_INFINITY;
        }
        let e = w[1] - params.phi * w[0];
        acc.add(-0.5 * (h.ln() + e * e / h));
    }
    acc.value()
}

fn scores(series: &Series, p: [f64; 3]) -> Vec<[f64; 3]> {
    series
        .values()
        .windows(2)
        .map(|w| {
            let y2 = w[0] * w[0];
            let h = p[1] + p[2] * y2;
            let e = w[1] - p[0] * w[0];
            let common = -0.5 * (1.0 / h - e * e / (h * h));
            [e * w[0] / h, common, common * y2]
        })
        .collect()
}

fn total_score(series: &Series, p: [f64; 3]) -> [f64; 3] {
    let mut acc = [KahanSum::new(); 3];
    for s in scores(series, p) {
        for i in 0..3 {
            acc[i].add(s[i]);
        }
    }
    [acc[0].value(), acc[1].value(), acc[2].value()]
}

fn sandwich_se(series: &Series, p: [f64; 3]) -> Option<[f64; 3]> {
    // Negative Hessian by central differences of the analytic score.
    let mut hess = vec![vec![0.0; 3]; 3];
    for j in 0..3 {
        let h = if j == 0 { 1e-5 * p[0].abs().max(1.0) } else { 1e-4 * p[j] };
        if !(h > 0.0) {
            return None;
        }
        let mut up = p;
        let mut dn = p;
        up[j] += h;
        dn[j] -= h;
        let (su, sd) = (total_score(series, up), total_score(series, dn));
        for i in 0..3 {
            hess[i][j] = -(su[i] - sd[i]) / (2.0 * h);
        }
    }
    for i in 0..3 {
        for j in 0..i {
            let avg = 0.5 * (hess[i][j] + hess[j][i]);
            hess[i][j] = avg;
            hess[j][i] = avg;
        }
    }
    let mut outer = vec![vec![0.0; 3]; 3];
    for s in scores(series, p) {
        for i in 0..3 {
            for j in 0..3 {
                outer[i][j] += s[i] * s[j];
            }
        }
    }
    let inv = invert_dense(&hess)?;
    let mut se = [0.0; 3];
    for i in 0..3 {
        let v: f64 = (0..3).map(|k| (0..3).map(|l| inv[i][k] * outer[k][l] * inv[l][i]).sum::<f64>()).sum();
        if !(v > 0.0) || !v.is_finite() {
            return None;
        }
        se[i] = v.sqrt();
    }
    Some(se)
}

pub fn dar_qmle_fit(series: &Series, init: DarParams, opts: &DarFitOptions) -> Result<DarFit> {
    if series.n() < 10 {
        return Err(DarwinError::InvalidArgument("DAR fit needs at least 10 transitions".into()));
    }
    let y = series.values();
    let mean_sq = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
    // Zero components of the starting point are lifted off the boundary.
    let omega0 = init.omega.max(1e-8 * mean_sq);
    let alpha0 = init.alpha.max(1e-8);
    let loglik_init = dar_loglik(series, init);
    let objective = |x: &[f64]| {
        let p = DarParams { phi: x[0], omega: x[1].exp(), alpha: x[2].exp() };
        -dar_loglik(series, p)
    };
    let mut x = vec![init.phi, omega0.ln(), alpha0.ln()];
    let mut iterations = 0;
    let mut converged = false;
    let mut best = f64::INFINITY;
    for _ in 0..=opts.restarts {
        let r = nelder_mead(objective, &x, &opts.simplex);
        iterations += r.iterations;
        converged = r.converged;
        let improved = r.f < best - opts.simplex.f_tol * (1.0 + best.abs().min(1e300));
        if r.f <= best {
            best = r.f;
            x = r.x;
        }
        if converged && !improved {
            break;
        }
    }
    let lambda_hat = DarParams { phi: x[0], omega: x[1].exp(), alpha: x[2].exp() };
    let loglik = -best;
    if !loglik.is_finite() {
        return Err(DarwinError::Degenerate("DAR likelihood is not finite at any visited point"));
    }
    Ok(DarFit {
        lambda_hat,
        loglik,
        loglik_init,
        converged,
        iterations,
        se: sandwich_se(series, [lambda_hat.phi, lambda_hat.omega, lambda_hat.alpha]),
    })
}
