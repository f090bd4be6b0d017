//! Empirical check of the functional limit of `log|y_[ns]|`: the centred,
//! `√n`-scaled log path should behave like `σ_γ B(s)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DarwinError, Result};
use crate::innovations::InnovationSpec;
use crate::numeric::mean_sd;
use crate::process::{auxiliary_from_innovations, DarwinParams};
use crate::rng::stream_rng;
use crate::theory::stats::{ks_test, normal_cdf, KsResult};
use crate::theory::LyapunovProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub n: usize,
    pub replications: usize,
    pub gamma0: f64,
    pub sigma2: f64,
    pub s_grid: Vec<f64>,
    /// Empirical variance of `Z_n(s)` per grid point.
    pub variances: Vec<f64>,
    /// `variances[i] / (σ² s_i)`.
    pub variance_ratios: Vec<f64>,
    pub ks: Vec<KsResult>,
    /// KS non-rejection at the 1% level.
    pub pass: Vec<bool>,
    /// `corr(Z(s_i), Z(s_{i+1}) - Z(s_i))` for consecutive grid points.
    pub increment_corr: Vec<f64>,
}

pub const CLT_LEVEL: f64 = 0.01;

/// Simulates `m` auxiliary paths of length `n` with `x_0 = |y_0|`,
/// `y_0 ~ N(0,1)`, and tabulates `Z_n(s) = (log x_[ns] - [ns]γ₀)/√n`.
pub fn clt_path_check(
    params: DarwinParams,
    spec: InnovationSpec,
    profile: &LyapunovProfile,
    n: usize,
    m: usize,
    s_grid: &[f64],
    seed: u64,
) -> Result<CltReport> {
    if n < 500 || m < 500 {
        return Err(DarwinError::InvalidArgument(format!("CLT check needs n >= 500 and M >= 500 (got {n}, {m})")));
    }
    if s_grid.is_empty()
        || s_grid.iter().any(|&s| !(s > 0.0 && s <= 1.0))
        || s_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(DarwinError::InvalidArgument("s grid must be strictly increasing in (0, 1]".into()));
    }
    let idx: Vec<usize> = s_grid.iter().map(|&s| (n as f64 * s).floor() as usize).collect();
    let root_n = (n as f64).sqrt();
    let gamma0 = profile.gamma0;
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let y0: f64 = rng.sample(StandardNormal);
            let mut eta = vec![0.0; n];
            spec.fill(&mut rng, &mut eta);
            let path = auxiliary_from_innovations(params, y0.abs(), &eta)?;
            let la = path.logabs();
            Ok(idx.iter().map(|&k| (la[k] - k as f64 * gamma0) / root_n).collect())
        })
        .collect::<Result<_>>()?;

    let column = |j: usize| rows.iter().map(|row| row[j]).collect::<Vec<f64>>();
    let mut variances = Vec::with_capacity(idx.len());
    let mut ratios = Vec::with_capacity(idx.len());
    let mut ks = Vec::with_capacity(idx.len());
    let mut pass = Vec::with_capacity(idx.len());
    for (j, &s) in s_grid.iter().enumerate() {
        let z = column(j);
        let (_, sd) = mean_sd(&z);
        let target = profile.sigma2 * s;
        variances.push(sd * sd);
        ratios.push(sd * sd / target);
        let scale = target.sqrt();
        let res = ks_test(&z, |x| normal_cdf(x / scale))?;
        pass.push(res.p > CLT_LEVEL);
        ks.push(res);
    }
    let mut increment_corr = Vec::new();
    for j in 0..s_grid.len().saturating_sub(1) {
        let a = column(j);
        let inc: Vec<f64> = column(j + 1).iter().zip(&a).map(|(b, a)| b - a).collect();
        increment_corr.push(correlation(&a, &inc));
    }
    Ok(CltReport {
        n,
        replications: m,
        gamma0,
        sigma2: profile.sigma2,
        s_grid: s_grid.to_vec(),
        variances,
        variance_ratios: ratios,
        ks,
        pass,
        increment_corr,
    })
}

pub(crate) fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_sd(a);
    let (mb, sb) = mean_sd(b);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64;
    cov / (sa * sb)
}
