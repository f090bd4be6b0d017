//! Monte Carlo studies of the estimators and the stability test.
//!
//! Each replication draws from its own seed stream, results are collected by
//! index and reduced serially with compensated sums, so output is identical
//! for any number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DarwinError, Result};
use crate::estimate::{lyapunov_estimate, qmle_fit};
use crate::innovations::InnovationSpec;
use crate::numeric::mean_sd;
use crate::process::{simulate_darwin_rng, DarwinParams, InitialValue};
use crate::rng::{cell_stream, stream_rng};
use crate::theory::stats::normal_quantile;
use crate::theory::{asymptotic_sd, calibrate_alpha_to, lyapunov_moments, LyapunovProfile, MomentMethod};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub spec: InnovationSpec,
    pub phi: f64,
    pub alpha_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub y0: InitialValue,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 || self.replications > u32::MAX as usize {
            return Err(DarwinError::InvalidArgument("replications must be in 1..=2^32-1".into()));
        }
        if self.alpha_list.is_empty() || self.n_list.is_empty() {
            return Err(DarwinError::InvalidArgument("alpha and n lists must be non-empty".into()));
        }
        for &a in &self.alpha_list {
            DarwinParams::new(self.phi, a)?;
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return Err(DarwinError::InvalidArgument("every n must be at least 2".into()));
        }
        Ok(())
    }

    /// The standard study grid: `φ = 0.5`, the three tabulated `α₀` per law, `n ∈ {100, 200}`.
    pub fn table2(spec: InnovationSpec, replications: usize, master_seed: u64) -> Self {
        Self {
            spec,
            phi: 0.5,
            alpha_list: table1_alphas(spec).to_vec(),
            n_list: vec![100, 200],
            replications,
            master_seed,
            y0: InitialValue::Random,
        }
    }
}

/// Tabulated `α₀` values (below, at and above the stability boundary) for `φ = 0.5`.
pub fn table1_alphas(spec: InnovationSpec) -> [f64; 3] {
    match spec {
        InnovationSpec::Gaussian => [3.1, 3.3058, 3.5],
        InnovationSpec::StudentT5Std => [4.1, 4.3697, 4.5],
        InnovationSpec::LaplaceStd => [5.0, 5.1726, 5.4],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub em: f64,
    pub esd: f64,
    pub asd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub spec: InnovationSpec,
    pub alpha0: f64,
    pub n: usize,
    pub cell: u32,
    pub gamma0: f64,
    pub sigma2: f64,
    pub phi: Summary,
    pub alpha: Summary,
    /// `n/(n-1) α̂`; its ASD is that of `α̂`.
    pub alpha_star: Summary,
    pub gamma: Summary,
    pub replications: usize,
    pub exclusions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
}

#[derive(Debug, Clone, Copy)]
struct Replicate {
    phi: f64,
    alpha: f64,
    alpha_star: f64,
    gamma: f64,
    t_stat: f64,
}

fn replicate(params: DarwinParams, spec: InnovationSpec, n: usize, y0: InitialValue, seed: u64, stream: u64) -> Option<Replicate> {
    let mut rng = stream_rng(seed, stream);
    let path = simulate_darwin_rng(params, spec, n, y0, &mut rng).ok()?;
    let fit = qmle_fit(&path).ok()?;
    let stab = lyapunov_estimate(&path).ok()?;
    Some(Replicate {
        phi: fit.phi_hat,
        alpha: fit.alpha_hat,
        alpha_star: fit.alpha_star,
        gamma: stab.gamma_hat,
        t_stat: stab.t_stat,
    })
}

fn run_cell(params: DarwinParams, spec: InnovationSpec, n: usize, y0: InitialValue, seed: u64, stream_group: u32, reps: usize) -> Vec<Option<Replicate>> {
    (0..reps)
        .into_par_iter()
        .map(|r| replicate(params, spec, n, y0, seed, cell_stream(stream_group, r as u32)))
        .collect()
}

fn profile(params: DarwinParams, spec: InnovationSpec) -> Result<LyapunovProfile> {
    lyapunov_moments(params, spec, MomentMethod::Quadrature)
}

/// EM/ESD/ASD of `φ̂`, `α̂` and `γ̂` for every `(α₀, n)` cell.
/// Replication `r` of cell `c` uses stream `(master_seed, c, r)`.
pub fn run_estimation_study(config: &StudyConfig) -> Result<StudyTable> {
    config.validate()?;
    let mut rows = Vec::new();
    for (ai, &alpha0) in config.alpha_list.iter().enumerate() {
        let params = DarwinParams::new(config.phi, alpha0)?;
        let prof = profile(params, config.spec)?;
        for (ni, &n) in config.n_list.iter().enumerate() {
            let cell = (ai * config.n_list.len() + ni) as u32;
            let reps = run_cell(params, config.spec, n, config.y0, config.master_seed, cell, config.replications);
            let ok: Vec<Replicate> = reps.iter().flatten().copied().collect();
            if ok.is_empty() {
                return Err(DarwinError::Degenerate("every replication in a cell failed"));
            }
            let asd = asymptotic_sd(alpha0, config.spec.kurtosis(), prof.sigma2, n)?;
            let summarize = |f: fn(&Replicate) -> f64, asd: f64| {
                let v: Vec<f64> = ok.iter().map(f).collect();
                let (em, esd) = mean_sd(&v);
                Summary { em, esd, asd }
            };
            rows.push(StudyRow {
                spec: config.spec,
                alpha0,
                n,
                cell,
                gamma0: prof.gamma0,
                sigma2: prof.sigma2,
                phi: summarize(|r| r.phi, asd.sd_phi),
                alpha: summarize(|r| r.alpha, asd.sd_alpha),
                alpha_star: summarize(|r| r.alpha_star, asd.sd_alpha),
                gamma: summarize(|r| r.gamma, asd.sd_gamma),
                replications: config.replications,
                exclusions: reps.len() - ok.len(),
            });
        }
    }
    Ok(StudyTable { config: config.clone(), rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub spec: InnovationSpec,
    pub phi: f64,
    pub alpha_grid: Vec<f64>,
    pub n_list: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub level: f64,
    pub y0: InitialValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub alpha0: f64,
    pub gamma0: f64,
    pub n: usize,
    pub rejections: usize,
    pub replications: usize,
    pub exclusions: usize,
    /// Rejection frequency; the empirical size where `γ₀ = 0`.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub config: PowerConfig,
    pub critical_value: f64,
    pub rows: Vec<PowerRow>,
}

/// `α` values whose exponents are evenly spaced over `[-half_width, half_width]`
/// (`points` odd puts the boundary itself in the middle).
pub fn default_power_grid(phi: f64, spec: InnovationSpec, points: usize, half_width: f64) -> Result<Vec<f64>> {
    if points < 2 {
        return calibrate_alpha_to(phi, spec, 0.0, None).map(|c| vec![c.alpha]);
    }
    (0..points)
        .map(|i| {
            let target = -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64;
            calibrate_alpha_to(phi, spec, target, None).map(|c| c.alpha)
        })
        .collect()
}

/// Rejection frequency of the two-sided stability test across an `α` grid.
///
/// Replication `r` at the `j`-th sample size uses stream `(master_seed, j, r)`
/// for every grid point, so neighbouring points share innovations.
pub fn run_size_power(config: &PowerConfig) -> Result<PowerTable> {
    if !(config.level > 0.0 && config.level <= 1.0) {
        return Err(DarwinError::InvalidArgument(format!("level {} outside (0, 1]", config.level)));
    }
    StudyConfig {
        spec: config.spec,
        phi: config.phi,
        alpha_list: config.alpha_grid.clone(),
        n_list: config.n_list.clone(),
        replications: config.replications,
        master_seed: config.master_seed,
        y0: config.y0,
    }
    .validate()?;
    let crit = normal_quantile(1.0 - config.level / 2.0)?;
    let mut rows = Vec::new();
    for (ni, &n) in config.n_list.iter().enumerate() {
        for &alpha0 in &config.alpha_grid {
            let params = DarwinParams::new(config.phi, alpha0)?;
            let gamma0 = profile(params, config.spec)?.gamma0;
            let reps = run_cell(params, config.spec, n, config.y0, config.master_seed, ni as u32, config.replications);
            let ok: Vec<&Replicate> = reps.iter().flatten().collect();
            let rejections = ok.iter().filter(|r| r.t_stat.abs() > crit).count();
            rows.push(PowerRow {
                alpha0,
                gamma0,
                n,
                rejections,
                replications: config.replications,
                exclusions: reps.len() - ok.len(),
                frequency: if ok.is_empty() { f64::NAN } else { rejections as f64 / ok.len() as f64 },
            });
        }
    }
    Ok(PowerTable { config: config.clone(), critical_value: crit, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    GammaHat,
    PhiHat,
    AlphaHat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingDistribution {
    pub target: Target,
    pub alpha0: f64,
    pub n: usize,
    /// `√n (estimate - truth)` per successful replication, in replication order.
    pub values: Vec<f64>,
    pub overlay_mean: f64,
    pub overlay_variance: f64,
    pub exclusions: usize,
}

/// Standardized replicates for every cell of `config` with the matching
/// normal-limit overlay; uses the same streams as [`run_estimation_study`].
pub fn sampling_distribution(config: &StudyConfig, target: Target) -> Result<Vec<SamplingDistribution>> {
    config.validate()?;
    let mut out = Vec::new();
    for (ai, &alpha0) in config.alpha_list.iter().enumerate() {
        let params = DarwinParams::new(config.phi, alpha0)?;
        let prof = profile(params, config.spec)?;
        for (ni, &n) in config.n_list.iter().enumerate() {
            let cell = (ai * config.n_list.len() + ni) as u32;
            let reps = run_cell(params, config.spec, n, config.y0, config.master_seed, cell, config.replications);
            let root_n = (n as f64).sqrt();
            let (truth, variance): (f64, f64) = match target {
                Target::GammaHat => (prof.gamma0, prof.sigma2),
                Target::PhiHat => (config.phi, alpha0),
                Target::AlphaHat => (alpha0, (config.spec.kurtosis() - 1.0) * alpha0 * alpha0),
            };
            let values: Vec<f64> = reps
                .iter()
                .flatten()
                .map(|r| {
                    let est = match target {
                        Target::GammaHat => r.gamma,
                        Target::PhiHat => r.phi,
                        Target::AlphaHat => r.alpha,
                    };
                    root_n * (est - truth)
                })
                .collect();
            out.push(SamplingDistribution {
                target,
                alpha0,
                n,
                exclusions: reps.len() - values.len(),
                values,
                overlay_mean: 0.0,
                overlay_variance: variance,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(reps: usize) -> StudyConfig {
        StudyConfig {
            spec: InnovationSpec::Gaussian,
            phi: 0.5,
            alpha_list: vec![3.3058],
            n_list: vec![50],
            replications: reps,
            master_seed: 3,
            y0: InitialValue::Random,
        }
    }

    #[test]
    fn single_replication_has_zero_esd() {
        let t = run_estimation_study(&small(1)).unwrap();
        let row = &t.rows[0];
        assert_eq!(row.phi.esd, 0.0);
        assert_eq!(row.gamma.esd, 0.0);
        let mut rng = stream_rng(3, cell_stream(0, 0));
        let path = simulate_darwin_rng(DarwinParams::new(0.5, 3.3058).unwrap(), InnovationSpec::Gaussian, 50, InitialValue::Random, &mut rng).unwrap();
        assert_eq!(row.phi.em, qmle_fit(&path).unwrap().phi_hat);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = small(64);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_estimation_study(&cfg)).unwrap();
        let b = four.install(|| run_estimation_study(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn level_one_always_rejects() {
        let cfg = PowerConfig {
            spec: InnovationSpec::LaplaceStd,
            phi: 0.5,
            alpha_grid: vec![5.1726],
            n_list: vec![40],
            replications: 50,
            master_seed: 1,
            level: 1.0,
            y0: InitialValue::Random,
        };
        let t = run_size_power(&cfg).unwrap();
        assert_eq!(t.rows[0].frequency, 1.0);
    }

    #[test]
    fn overlay_matches_profile() {
        let d = sampling_distribution(&small(20), Target::GammaHat).unwrap();
        let p = lyapunov_moments(DarwinParams::new(0.5, 3.3058).unwrap(), InnovationSpec::Gaussian, MomentMethod::Quadrature).unwrap();
        assert_eq!(d[0].overlay_variance, p.sigma2);
        assert_eq!(d[0].values.len(), 20);
    }

    #[test]
    fn grid_is_centred_on_boundary() {
        let g = default_power_grid(0.5, InnovationSpec::Gaussian, 11, 0.05).unwrap();
        assert_eq!(g.len(), 11);
        assert!((g[5] - 3.3058).abs() < 1e-3);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
