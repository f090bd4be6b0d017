use darwin::estimate::{
    dar_qmle_fit, lyapunov_estimate, plugin_lyapunov, qmle_fit, residual_acf, wald_test, DarFitOptions,
};
use darwin::innovations::sample;
use darwin::montecarlo::{run_estimation_study, sampling_distribution, StudyConfig, Target};
use darwin::numeric::{mean_sd, KahanSum};
use darwin::process::{simulate_dar, simulate_darwin};
use darwin::theory::stats::{ks_test, normal_cdf};
use darwin::{DarParams, DarwinParams, InitialValue, InnovationSpec, Series};
use proptest::prelude::*;

fn boundary() -> DarwinParams {
    DarwinParams::new(0.5, 3.3058).unwrap()
}

fn level() -> impl Strategy<Value = f64> {
    (0.01f64..100.0, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn residuals_are_centred_and_standardized(values in prop::collection::vec(level(), 3..300)) {
        let s = Series::new(values).unwrap();
        if let Ok(fit) = qmle_fit(&s) {
            let sum: KahanSum = fit.residuals.iter().copied().collect();
            let sq: KahanSum = fit.residuals.iter().map(|e| e * e).collect();
            prop_assert!(sum.value().abs() < 1e-12, "sum = {}", sum.value());
            prop_assert!((sq.value() / fit.n as f64 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn estimators_ignore_a_common_scale(values in prop::collection::vec(level(), 6..200)) {
        let s = Series::new(values).unwrap();
        let (Ok(fit), Ok(stab)) = (qmle_fit(&s), lyapunov_estimate(&s)) else { return Ok(()) };
        let wald = wald_test(&fit, &[[1.0, 0.0]], &[0.0]).unwrap();
        let acf = residual_acf(&fit.innovations, 2, false).unwrap();
        for c in [1e-6, 1e6] {
            let t = s.scaled(c).unwrap();
            let f2 = qmle_fit(&t).unwrap();
            let s2 = lyapunov_estimate(&t).unwrap();
            prop_assert!(close(fit.phi_hat, f2.phi_hat, 1e-12));
            prop_assert!(close(fit.alpha_hat, f2.alpha_hat, 1e-12));
            prop_assert!(close(stab.gamma_hat, s2.gamma_hat, 1e-12));
            prop_assert!(close(stab.t_stat, s2.t_stat, 1e-12));
            prop_assert!(close(wald.w_stat, wald_test(&f2, &[[1.0, 0.0]], &[0.0]).unwrap().w_stat, 1e-12));
            let acf2 = residual_acf(&f2.innovations, 2, false).unwrap();
            for (a, b) in acf.acf.iter().zip(&acf2.acf) {
                prop_assert!(close(*a, *b, 1e-12));
            }
        }
    }
}

fn boundary_study(reps: usize, n: usize, seed: u64) -> StudyConfig {
    StudyConfig {
        spec: InnovationSpec::Gaussian,
        phi: 0.5,
        alpha_list: vec![3.3058],
        n_list: vec![n],
        replications: reps,
        master_seed: seed,
        y0: InitialValue::Random,
    }
}

#[test]
fn exponent_and_qmle_across_a_thousand_paths() {
    let table = run_estimation_study(&boundary_study(1000, 200, 77)).unwrap();
    let row = &table.rows[0];
    assert_eq!(row.exclusions, 0);
    assert!(row.gamma.em.abs() <= 0.005, "EM gamma {}", row.gamma.em);
    assert!((row.gamma.esd / 0.0785 - 1.0).abs() <= 0.10, "ESD gamma {}", row.gamma.esd);
    assert!((row.phi.em - 0.5).abs() <= 0.01, "EM phi {}", row.phi.em);
    assert!((row.alpha.em - 199.0 / 200.0 * 3.3058).abs() <= 0.04, "EM alpha {}", row.alpha.em);
}

#[test]
fn phi_hat_is_asymptotically_normal() {
    let cfg = boundary_study(2000, 200, 91);
    let phi = &sampling_distribution(&cfg, Target::PhiHat).unwrap()[0];
    let z: Vec<f64> = phi.values.iter().map(|v| v / phi.overlay_variance.sqrt()).collect();
    let ks = ks_test(&z, normal_cdf).unwrap();
    assert!(ks.p > 0.01, "KS p = {}", ks.p);
}

#[test]
fn phi_hat_and_alpha_hat_are_uncorrelated() {
    let cfg = boundary_study(2000, 200, 92);
    let phi = &sampling_distribution(&cfg, Target::PhiHat).unwrap()[0];
    let alpha = &sampling_distribution(&cfg, Target::AlphaHat).unwrap()[0];
    assert_eq!(phi.values.len(), alpha.values.len());
    let (ma, sa) = mean_sd(&phi.values);
    let (mb, sb) = mean_sd(&alpha.values);
    let m = phi.values.len() as f64;
    let cov = phi.values.iter().zip(&alpha.values).map(|(a, b)| (a - ma) * (b - mb)).sum::<f64>() / (m - 1.0);
    let corr = cov / (sa * sb);
    assert!(corr.abs() <= 3.0 / m.sqrt(), "corr = {corr}");
}

#[test]
fn wald_detects_nonzero_phi_at_n_691() {
    let seeds = 1000;
    let rejections = (0..seeds)
        .filter(|&s| {
            let path = simulate_darwin(boundary(), InnovationSpec::Gaussian, 691, InitialValue::Random, s).unwrap();
            let fit = qmle_fit(&path).unwrap();
            wald_test(&fit, &[[1.0, 0.0]], &[0.0]).unwrap().p_value < 0.05
        })
        .count();
    let rate = rejections as f64 / seeds as f64;
    assert!(rate > 0.5, "rejection rate {rate}");
}

#[test]
fn white_noise_acf_stays_inside_the_band() {
    let n = 2000;
    let band = 4.0 / (n as f64).sqrt();
    let seeds = 200;
    let inside = (0..seeds)
        .filter(|&s| {
            let e = sample(InnovationSpec::Gaussian, n, 3000 + s);
            residual_acf(&e, 20, false).unwrap().acf.iter().all(|a| a.abs() < band)
        })
        .count();
    assert!(inside as f64 >= 0.99 * seeds as f64, "{inside} of {seeds}");
}

#[test]
fn plugin_exponent_tracks_the_direct_estimate() {
    let path = simulate_darwin(boundary(), InnovationSpec::Gaussian, 10_000, InitialValue::Random, 5).unwrap();
    let fit = qmle_fit(&path).unwrap();
    let plug = plugin_lyapunov(&fit).unwrap();
    let direct = lyapunov_estimate(&path).unwrap().gamma_hat;
    assert_eq!(plug.skipped, 0);
    assert!((plug.value - direct).abs() < 0.05, "{} vs {direct}", plug.value);

    let explosive = simulate_darwin(DarwinParams::new(0.5, 12.0).unwrap(), InnovationSpec::Gaussian, 2000, InitialValue::Random, 6).unwrap();
    assert!(plugin_lyapunov(&qmle_fit(&explosive).unwrap()).unwrap().value > 0.0);
}

#[test]
fn dar_fit_recovers_stationary_parameters() {
    let truth = DarParams::new(0.5, 1.0, 0.3).unwrap();
    let y = simulate_dar(truth, InnovationSpec::Gaussian, 5000, InitialValue::Random, 21).unwrap();
    let fit = dar_qmle_fit(&y, DarParams { phi: 0.1, omega: 0.5, alpha: 0.1 }, &DarFitOptions::default()).unwrap();
    let se = fit.se.expect("standard errors");
    let est = [fit.lambda_hat.phi, fit.lambda_hat.omega, fit.lambda_hat.alpha];
    for (i, t) in [truth.phi, truth.omega, truth.alpha].into_iter().enumerate() {
        assert!((est[i] - t).abs() <= 3.0 * se[i], "param {i}: {} vs {t} (se {})", est[i], se[i]);
    }
}

#[test]
fn dar_fit_pushes_the_intercept_to_zero_on_darwin_data() {
    let path = simulate_darwin(boundary(), InnovationSpec::Gaussian, 1000, InitialValue::Random, 8).unwrap();
    let y = Series::from_path(&path).unwrap();
    let mut y2: Vec<f64> = y.values().iter().map(|v| v * v).collect();
    y2.sort_by(f64::total_cmp);
    let median = y2[y2.len() / 2];
    let fit = dar_qmle_fit(&y, DarParams { phi: 0.3, omega: median, alpha: 1.0 }, &DarFitOptions::default()).unwrap();
    assert!(
        fit.lambda_hat.omega < 1e-3 * fit.lambda_hat.alpha * median,
        "omega {} vs alpha {} median {median}",
        fit.lambda_hat.omega,
        fit.lambda_hat.alpha
    );
}
