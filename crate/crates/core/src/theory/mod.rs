//! Theoretical Lyapunov exponent and its variance, stability-boundary
//! calibration, asymptotic standard deviations and the statistical kernel.

pub mod clt;
pub mod quadrature;
pub mod root;
pub mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DarwinError, Result};
use crate::innovations::InnovationSpec;
use crate::numeric::KahanSum;
use crate::process::DarwinParams;
use crate::rng::stream_rng;
use quadrature::{integrate_real_line, QuadOptions, QuadResult};
use root::{find_root, RootOptions};

pub use clt::{clt_path_check, CltReport};

pub const DEFAULT_MC_DRAWS: usize = 10_000_000;
const MC_CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MomentMethod {
    Quadrature,
    MonteCarlo { draws: usize, seed: u64 },
}

impl MomentMethod {
    pub fn monte_carlo_default() -> Self {
        MomentMethod::MonteCarlo { draws: DEFAULT_MC_DRAWS, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMethod {
    Quadrature,
    Montecarlo,
}

/// `γ₀ = E log|φ + η√α|` and `σ²_γ = var log|φ + η√α|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovProfile {
    pub gamma0: f64,
    pub sigma2: f64,
    pub method: ProfileMethod,
    /// Quadrature error bound on `gamma0`, or its Monte Carlo standard error.
    pub err_estimate: f64,
    pub sigma2_err: f64,
    /// Monte Carlo was used because quadrature did not converge.
    pub fallback: bool,
    pub draws: Option<usize>,
}

fn log_factor(phi: f64, scale: f64, x: f64) -> f64 {
    let v = (phi + x * scale).abs();
    if v == 0.0 { 0.0 } else { v.ln() }
}

fn quad_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-11, rel_tol: 1e-11, max_intervals: 4000 }
}

/// `γ₀` by quadrature, split at the singularity `-φ/√α` and at 0.
pub fn lyapunov_exponent_quad(params: DarwinParams, spec: InnovationSpec) -> QuadResult {
    let scale = params.alpha.sqrt();
    let singular = -params.phi / scale;
    integrate_real_line(
        |x| {
            let f = spec.density(x);
            if f == 0.0 { 0.0 } else { log_factor(params.phi, scale, x) * f }
        },
        &[singular, 0.0],
        &quad_opts(),
    )
}

fn quadrature_profile(params: DarwinParams, spec: InnovationSpec) -> Option<LyapunovProfile> {
    let scale = params.alpha.sqrt();
    let singular = -params.phi / scale;
    let first = lyapunov_exponent_quad(params, spec);
    if !first.converged {
        return None;
    }
    let gamma0 = first.value;
    let second = integrate_real_line(
        |x| {
            let f = spec.density(x);
            if f == 0.0 {
                0.0
            } else {
                let d = log_factor(params.phi, scale, x) - gamma0;
                d * d * f
            }
        },
        &[singular, 0.0],
        &quad_opts(),
    );
    if !second.converged || !(second.value > 0.0) {
        return None;
    }
    Some(LyapunovProfile {
        gamma0,
        sigma2: second.value,
        method: ProfileMethod::Quadrature,
        err_estimate: first.error,
        sigma2_err: second.error,
        fallback: false,
        draws: None,
    })
}

fn monte_carlo_profile(params: DarwinParams, spec: InnovationSpec, draws: usize, seed: u64) -> LyapunovProfile {
    let scale = params.alpha.sqrt();
    let chunks = draws.div_ceil(MC_CHUNK);
    let partial: Vec<(KahanSum, KahanSum)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = MC_CHUNK.min(draws - c * MC_CHUNK);
            let mut s1 = KahanSum::new();
            let mut s2 = KahanSum::new();
            for _ in 0..len {
                let l = log_factor(params.phi, scale, spec.draw(&mut rng));
                s1.add(l);
                s2.add(l * l);
            }
            (s1, s2)
        })
        .collect();
    let mut s1 = KahanSum::new();
    let mut s2 = KahanSum::new();
    for (a, b) in &partial {
        s1.merge(a);
        s2.merge(b);
    }
    let n = draws as f64;
    let gamma0 = s1.value() / n;
    let sigma2 = (s2.value() / n - gamma0 * gamma0) * n / (n - 1.0);
    LyapunovProfile {
        gamma0,
        sigma2,
        method: ProfileMethod::Montecarlo,
        err_estimate: (sigma2 / n).sqrt(),
        // Rough: var(s²) ≈ 2σ⁴/n for near-normal log factors.
        sigma2_err: sigma2 * (2.0 / n).sqrt(),
        fallback: false,
        draws: Some(draws),
    }
}

/// Theoretical moments of the log factor. Quadrature that fails to converge
/// falls back to a default-size Monte Carlo run with `fallback` set.
pub fn lyapunov_moments(params: DarwinParams, spec: InnovationSpec, method: MomentMethod) -> Result<LyapunovProfile> {
    DarwinParams::new(params.phi, params.alpha)?;
    match method {
        MomentMethod::Quadrature => Ok(quadrature_profile(params, spec).unwrap_or_else(|| {
            LyapunovProfile { fallback: true, ..monte_carlo_profile(params, spec, DEFAULT_MC_DRAWS, 0) }
        })),
        MomentMethod::MonteCarlo { draws, seed } => {
            if draws < 2 {
                return Err(DarwinError::InvalidArgument("Monte Carlo needs at least two draws".into()));
            }
            Ok(monte_carlo_profile(params, spec, draws, seed))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub phi: f64,
    pub alpha: f64,
    pub gamma0: f64,
    pub target: f64,
    pub iterations: usize,
}

pub const DEFAULT_BRACKET: (f64, f64) = (1e-6, 1e3);
const BRACKET_LIMITS: (f64, f64) = (1e-12, 1e8);

/// `α` with `γ₀(φ, α) = 0`, the stability boundary.
pub fn calibrate_alpha(phi: f64, spec: InnovationSpec, bracket: Option<(f64, f64)>) -> Result<Calibration> {
    calibrate_alpha_to(phi, spec, 0.0, bracket)
}

/// `α` with `γ₀(φ, α) = target`. Root finding runs in `log α`; the bracket is
/// widened geometrically until it straddles a sign change.
pub fn calibrate_alpha_to(phi: f64, spec: InnovationSpec, target: f64, bracket: Option<(f64, f64)>) -> Result<Calibration> {
    let (mut lo, mut hi) = bracket.unwrap_or(DEFAULT_BRACKET);
    if !(lo > 0.0 && hi > lo) || !phi.is_finite() {
        return Err(DarwinError::InvalidArgument(format!("invalid bracket ({lo}, {hi}) or phi {phi}")));
    }
    let g = |log_alpha: f64| {
        let p = DarwinParams { phi, alpha: log_alpha.exp() };
        lyapunov_exponent_quad(p, spec).value - target
    };
    loop {
        if g(lo.ln()).signum() != g(hi.ln()).signum() {
            break;
        }
        if lo <= BRACKET_LIMITS.0 && hi >= BRACKET_LIMITS.1 {
            return Err(DarwinError::NoStabilityBoundary { lo, hi });
        }
        lo = (lo / 10.0).max(BRACKET_LIMITS.0);
        hi = (hi * 10.0).min(BRACKET_LIMITS.1);
    }
    let opts = RootOptions { ftol: 1e-6, xtol: 1e-13, max_iter: 200 };
    let root = find_root(g, lo.ln(), hi.ln(), &opts)?;
    Ok(Calibration { phi, alpha: root.x.exp(), gamma0: root.fx + target, target, iterations: root.iterations })
}

/// Asymptotic standard deviations of `φ̂`, `α̂` and `γ̂` at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSd {
    pub sd_phi: f64,
    pub sd_alpha: f64,
    pub sd_gamma: f64,
}

pub fn asymptotic_sd(alpha: f64, kappa4: f64, sigma2: f64, n: usize) -> Result<AsymptoticSd> {
    if n == 0 || !(alpha > 0.0) || !(kappa4 >= 1.0) || !(sigma2 >= 0.0) {
        return Err(DarwinError::InvalidArgument(
            "asymptotic sd needs n >= 1, alpha > 0, kappa4 >= 1, sigma2 >= 0".into(),
        ));
    }
    let n = n as f64;
    Ok(AsymptoticSd {
        sd_phi: (alpha / n).sqrt(),
        sd_alpha: alpha * ((kappa4 - 1.0) / n).sqrt(),
        sd_gamma: (sigma2 / n).sqrt(),
    })
}

/// Same as [`asymptotic_sd`] with `κ₄` from the innovation law and `σ²` from a profile.
pub fn asymptotic_sd_for(params: DarwinParams, spec: InnovationSpec, profile: &LyapunovProfile, n: usize) -> Result<AsymptoticSd> {
    asymptotic_sd(params.alpha, spec.kurtosis(), profile.sigma2, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(phi: f64, alpha: f64, spec: InnovationSpec) -> LyapunovProfile {
        lyapunov_moments(DarwinParams::new(phi, alpha).unwrap(), spec, MomentMethod::Quadrature).unwrap()
    }

    #[test]
    fn table_values_spot_check() {
        let p = quad(0.5, 3.3058, InnovationSpec::Gaussian);
        assert_eq!(p.method, ProfileMethod::Quadrature);
        assert!(p.gamma0.abs() < 5e-4 && (p.sigma2 - 1.2328).abs() < 2e-3, "{p:?}");
        let t = quad(0.5, 4.1, InnovationSpec::StudentT5Std);
        assert!((t.gamma0 + 0.0289).abs() < 5e-4 && (t.sigma2 - 1.3355).abs() < 2e-3, "{t:?}");
    }

    // E log|Z| = -(γ_EM + ln 2)/2 for standard normal Z.
    #[test]
    fn closed_form_at_zero_phi() {
        let euler = 0.577_215_664_901_532_9_f64;
        let want = -(euler + std::f64::consts::LN_2) / 2.0;
        let p = quad(0.0, 1.0, InnovationSpec::Gaussian);
        assert!((p.gamma0 - want).abs() < 1e-9, "{}", p.gamma0);
        assert!((want + 0.63518).abs() < 1e-5);
        // var log|Z| = π²/8
        assert!((p.sigma2 - std::f64::consts::PI.powi(2) / 8.0).abs() < 1e-9);
    }

    #[test]
    fn translation_law_at_zero_phi() {
        for spec in InnovationSpec::ALL {
            let base = quad(0.0, 1.0, spec);
            for &a in &[0.5, 2.0, 4.0] {
                let p = quad(0.0, a, spec);
                assert!((p.gamma0 - 0.5 * a.ln() - base.gamma0).abs() < 1e-9, "{spec} {a}");
                assert!((p.sigma2 - base.sigma2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn calibration_round_trip() {
        for spec in InnovationSpec::ALL {
            for &phi in &[0.0, 0.3, 0.5, 0.8] {
                let c = calibrate_alpha(phi, spec, None).unwrap();
                let g = quad(phi, c.alpha, spec).gamma0;
                assert!(g.abs() < 1e-5, "{spec} phi={phi} alpha={} gamma={g}", c.alpha);
            }
        }
    }

    #[test]
    fn calibration_to_target() {
        let c = calibrate_alpha_to(0.5, InnovationSpec::Gaussian, 0.0265, None).unwrap();
        assert!((c.alpha - 3.5).abs() < 5e-3, "{c:?}");
    }

    #[test]
    fn no_boundary_when_unstable_everywhere() {
        // |φ| large: log|φ + η√α| has positive mean for every α.
        let err = calibrate_alpha(50.0, InnovationSpec::Gaussian, Some((1e-3, 1e-2))).unwrap_err();
        assert!(matches!(err, DarwinError::NoStabilityBoundary { .. }));
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let p = DarwinParams::new(0.5, 3.3058).unwrap();
        let m = MomentMethod::MonteCarlo { draws: 200_000, seed: 5 };
        let a = lyapunov_moments(p, InnovationSpec::Gaussian, m).unwrap();
        let b = lyapunov_moments(p, InnovationSpec::Gaussian, m).unwrap();
        assert_eq!(a, b);
        let q = quad(0.5, 3.3058, InnovationSpec::Gaussian);
        assert!((a.gamma0 - q.gamma0).abs() < 4.0 * a.err_estimate);
    }

    #[test]
    fn asymptotic_sd_scaling() {
        let a = asymptotic_sd(3.3058, 3.0, 1.2328, 100).unwrap();
        assert!((a.sd_phi - 0.1818).abs() < 5e-5);
        assert!((a.sd_alpha - 0.4675).abs() < 5e-5);
        assert!((a.sd_gamma - 0.1110).abs() < 5e-5);
        let b = asymptotic_sd(3.3058, 3.0, 1.2328, 400).unwrap();
        assert_eq!(b.sd_phi * 2.0, a.sd_phi);
        assert_eq!(b.sd_alpha * 2.0, a.sd_alpha);
        assert_eq!(b.sd_gamma * 2.0, a.sd_gamma);
        let t = asymptotic_sd(4.3697, 9.0, 1.3368, 100).unwrap();
        assert!((t.sd_alpha - 1.2359).abs() < 5e-5);
        assert!(asymptotic_sd(1.0, 3.0, 1.0, 0).is_err());
    }
}
