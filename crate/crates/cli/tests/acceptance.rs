//! One line per acceptance criterion; exits nonzero if any fails.

use std::path::Path as FsPath;
use std::process::Command;

use darwin::estimate::{lyapunov_estimate, qmle_fit, residual_acf, wald_test};
use darwin::montecarlo::{run_estimation_study, run_size_power, table1_alphas, PowerConfig, StudyConfig};
use darwin::numeric::KahanSum;
use darwin::process::simulate_darwin;
use darwin::rng::stream_rng;
use darwin::theory::{asymptotic_sd, calibrate_alpha, clt_path_check, lyapunov_moments, MomentMethod};
use darwin::{DarwinParams, InitialValue, InnovationSpec, Series};
use rand::Rng;

const SEED: u64 = 2016;
const SPECS: [InnovationSpec; 3] = [InnovationSpec::Gaussian, InnovationSpec::StudentT5Std, InnovationSpec::LaplaceStd];

/// (α₀, γ₀, σ²) per innovation law at φ = 0.5.
const TABLE1: [[(f64, f64, f64); 3]; 3] = [
    [(3.1, -0.0297, 1.2326), (3.3058, 0.0, 1.2328), (3.5, 0.0265, 1.2326)],
    [(4.1, -0.0289, 1.3355), (4.3697, 0.0, 1.3368), (4.5, 0.0133, 1.3374)],
    [(5.0, -0.0143, 1.4357), (5.1726, 0.0, 1.4396), (5.4, 0.0182, 1.4443)],
];

/// Printed ASD triples (φ̂, α̂, γ̂) for n = 100 and n = 200, same cell order as `TABLE1`.
const TABLE2_ASD: [[[[f64; 3]; 2]; 3]; 3] = [
    [
        [[0.1761, 0.4384, 0.1110], [0.1245, 0.3100, 0.0785]],
        [[0.1818, 0.4675, 0.1110], [0.1286, 0.3306, 0.0785]],
        [[0.1871, 0.4950, 0.1110], [0.1323, 0.3500, 0.0785]],
    ],
    [
        [[0.2025, 1.1597, 0.1156], [0.1432, 0.8200, 0.0817]],
        [[0.2090, 1.2359, 0.1156], [0.1478, 0.8739, 0.0818]],
        [[0.2121, 1.2728, 0.1156], [0.1500, 0.9000, 0.0818]],
    ],
    [
        [[0.2236, 1.1180, 0.1198], [0.1581, 0.7906, 0.0847]],
        [[0.2274, 1.1566, 0.1200], [0.1608, 0.8179, 0.0848]],
        [[0.2324, 1.2075, 0.1202], [0.1643, 0.8538, 0.0850]],
    ],
];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn table1() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    let mut bad = Vec::new();
    for (si, spec) in SPECS.into_iter().enumerate() {
        for &(alpha, g, s2) in &TABLE1[si] {
            let prof = lyapunov_moments(DarwinParams::new(0.5, alpha).unwrap(), spec, MomentMethod::Quadrature)
                .map_err(|e| e.to_string())?;
            let (dg, ds) = ((prof.gamma0 - g).abs(), (prof.sigma2 - s2).abs());
            worst = (worst.0.max(dg), worst.1.max(ds));
            if dg > 5e-4 || ds > 5e-3 || prof.fallback {
                bad.push(format!("{}@{alpha}", spec.name()));
            }
        }
    }
    check(bad.is_empty(), format!("max |dgamma0| = {:.2e}, max |dsigma2| = {:.2e} {bad:?}", worst.0, worst.1))
}

fn calibration() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (si, spec) in SPECS.into_iter().enumerate() {
        let target = TABLE1[si][1].0;
        let c = calibrate_alpha(0.5, spec, None).map_err(|e| e.to_string())?;
        ok &= (c.alpha - target).abs() <= 1e-3;
        parts.push(format!("{} {:.5} (table {target})", spec.name(), c.alpha));
    }
    check(ok, parts.join(", "))
}

fn asd_exactness() -> Outcome {
    let mut mismatches = Vec::new();
    for (si, spec) in SPECS.into_iter().enumerate() {
        for (ci, &(alpha, _, s2)) in TABLE1[si].iter().enumerate() {
            for (ni, n) in [100usize, 200].into_iter().enumerate() {
                let a = asymptotic_sd(alpha, spec.kurtosis(), s2, n).map_err(|e| e.to_string())?;
                let got = [a.sd_phi, a.sd_alpha, a.sd_gamma];
                for k in 0..3 {
                    let printed = TABLE2_ASD[si][ci][ni][k];
                    if (got[k] - printed).abs() > 5e-5 + 1e-12 {
                        mismatches.push(format!("{}@{alpha} n={n} #{k}: {:.5} vs {printed}", spec.name(), got[k]));
                    }
                }
            }
        }
    }
    check(mismatches.is_empty(), format!("18 triples, {} mismatches {mismatches:?}", mismatches.len()))
}

fn table2_monte_carlo() -> Outcome {
    let cfg = StudyConfig {
        spec: InnovationSpec::Gaussian,
        phi: 0.5,
        alpha_list: vec![3.3058],
        n_list: vec![200],
        replications: 1000,
        master_seed: SEED,
        y0: InitialValue::Random,
    };
    let t = run_estimation_study(&cfg).map_err(|e| e.to_string())?;
    let r = &t.rows[0];
    let within = |s: &darwin::montecarlo::Summary| ((s.esd - s.asd) / s.asd).abs() <= 0.15;
    let ok = (r.phi.em - 0.5).abs() <= 0.012
        && (r.alpha.em - 3.2893).abs() <= 0.04
        && r.gamma.em.abs() <= 0.008
        && within(&r.phi)
        && within(&r.alpha)
        && within(&r.gamma)
        && r.exclusions == 0;
    check(
        ok,
        format!(
            "EM phi {:.4}, alpha {:.4}, gamma {:.4}; ESD/ASD phi {:.3}, alpha {:.3}, gamma {:.3}",
            r.phi.em,
            r.alpha.em,
            r.gamma.em,
            r.phi.esd / r.phi.asd,
            r.alpha.esd / r.alpha.asd,
            r.gamma.esd / r.gamma.asd
        ),
    )
}

fn unbiasedness() -> Outcome {
    let reps = 10_000;
    let mut parts = Vec::new();
    let mut ok = true;
    for (si, spec) in SPECS.into_iter().enumerate() {
        let (alpha0, gamma0, _) = TABLE1[si][1];
        let cfg = StudyConfig {
            spec,
            phi: 0.5,
            alpha_list: vec![alpha0],
            n_list: vec![100],
            replications: reps,
            master_seed: SEED,
            y0: InitialValue::Random,
        };
        let t = run_estimation_study(&cfg).map_err(|e| e.to_string())?;
        let r = &t.rows[0];
        let m = (reps - r.exclusions) as f64;
        let z = |s: &darwin::montecarlo::Summary, truth: f64| (s.em - truth) / (s.esd / m.sqrt());
        let zs = [
            z(&r.gamma, gamma0),
            z(&r.phi, 0.5),
            z(&r.alpha_star, alpha0),
            z(&r.alpha, 0.99 * alpha0),
        ];
        ok &= zs.iter().all(|v| v.abs() <= 3.0);
        parts.push(format!(
            "{} z(gamma, phi, alpha*, alpha) = ({:.2}, {:.2}, {:.2}, {:.2})",
            spec.name(),
            zs[0],
            zs[1],
            zs[2],
            zs[3]
        ));
    }
    check(ok, parts.join("; "))
}

fn size_and_power() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for spec in SPECS {
        let grid = table1_alphas(spec).to_vec();
        let cfg = PowerConfig {
            spec,
            phi: 0.5,
            alpha_grid: grid,
            n_list: vec![200],
            replications: 2000,
            master_seed: SEED,
            level: 0.05,
            y0: InitialValue::Random,
        };
        let t = run_size_power(&cfg).map_err(|e| e.to_string())?;
        let f: Vec<f64> = t.rows.iter().map(|r| r.frequency).collect();
        let size_ok = (0.035..=0.065).contains(&f[1]);
        let power_ok = f[0] > f[1] && f[2] > f[1];
        ok &= size_ok && power_ok;
        parts.push(format!("{} below/size/above = {:.4}/{:.4}/{:.4}", spec.name(), f[0], f[1], f[2]));
    }
    check(ok, parts.join("; "))
}

fn functional_clt() -> Outcome {
    let p = DarwinParams::new(0.5, 3.3058).unwrap();
    let prof = lyapunov_moments(p, InnovationSpec::Gaussian, MomentMethod::Quadrature).map_err(|e| e.to_string())?;
    let rep = clt_path_check(p, InnovationSpec::Gaussian, &prof, 2000, 1000, &[0.25, 0.5, 0.75, 1.0], SEED)
        .map_err(|e| e.to_string())?;
    let ok = rep.pass.iter().all(|&b| b) && rep.variance_ratios.iter().all(|r| (r - 1.0).abs() <= 0.15);
    let ps: Vec<String> = rep.ks.iter().map(|k| format!("{:.3}", k.p)).collect();
    let vr: Vec<String> = rep.variance_ratios.iter().map(|v| format!("{v:.3}")).collect();
    check(ok, format!("KS p = [{}], Var/(sigma2 s) = [{}]", ps.join(", "), vr.join(", ")))
}

fn identities() -> Outcome {
    let e = std::f64::consts::E;
    let fit = qmle_fit(&Series::new(vec![1.0, 2.0, 1.0]).unwrap()).map_err(|e| e.to_string())?;
    let stab = lyapunov_estimate(&Series::new(vec![1.0, e, e.powi(3)]).unwrap()).map_err(|e| e.to_string())?;
    let w = wald_test(&fit, &[[1.0, 0.0]], &[0.0]).map_err(|e| e.to_string())?;
    let mut ok = (fit.phi_hat - 1.25).abs() < 1e-10
        && (fit.alpha_hat - 0.5625).abs() < 1e-10
        && (stab.gamma_hat - 1.5).abs() < 1e-10
        && (stab.t_stat - 3.0 * 2f64.sqrt()).abs() < 1e-10
        && (w.w_stat - 50.0 / 9.0).abs() < 1e-10;

    let mut rng = stream_rng(SEED, 99);
    let mut worst_sum = 0.0f64;
    let mut worst_sq = 0.0f64;
    let mut worst_scale = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(3..400);
        let v: Vec<f64> = (0..n)
            .map(|_| {
                let m: f64 = rng.random_range(0.01..100.0);
                if rng.random::<bool>() { m } else { -m }
            })
            .collect();
        let s = Series::new(v).unwrap();
        let Ok(f) = qmle_fit(&s) else { continue };
        let sum: KahanSum = f.residuals.iter().copied().collect();
        let sq: KahanSum = f.residuals.iter().map(|x| x * x).collect();
        worst_sum = worst_sum.max(sum.value().abs());
        worst_sq = worst_sq.max((sq.value() / f.n as f64 - 1.0).abs());
        let st = lyapunov_estimate(&s).ok();
        let wd = wald_test(&f, &[[1.0, 0.0]], &[0.0]).map_err(|e| e.to_string())?;
        let acf = residual_acf(&f.innovations, 1, false).map_err(|e| e.to_string())?;
        for c in [1e-6, 1e6] {
            let t = s.scaled(c).unwrap();
            let f2 = qmle_fit(&t).map_err(|e| e.to_string())?;
            let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs().max(b.abs()));
            let mut d = rel(f.phi_hat, f2.phi_hat).max(rel(f.alpha_hat, f2.alpha_hat));
            d = d.max(rel(wd.w_stat, wald_test(&f2, &[[1.0, 0.0]], &[0.0]).unwrap().w_stat));
            d = d.max(rel(acf.acf[0], residual_acf(&f2.innovations, 1, false).unwrap().acf[0]));
            if let (Some(a), Ok(b)) = (st, lyapunov_estimate(&t)) {
                d = d.max(rel(a.gamma_hat, b.gamma_hat)).max(rel(a.t_stat, b.t_stat));
            }
            worst_scale = worst_scale.max(d);
        }
    }
    ok &= worst_sum <= 1e-12 && worst_sq <= 1e-12 && worst_scale <= 1e-12;
    check(
        ok,
        format!("hand examples exact; max |sum eta| {worst_sum:.1e}, max |mean eta^2 - 1| {worst_sq:.1e}, max scale drift {worst_scale:.1e}"),
    )
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_darwin"))
}

fn run_bin(args: &[&str], workers: &str) -> Result<Vec<u8>, String> {
    let out = bin().args(args).env("DARWIN_WORKERS", workers).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr).trim()));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let cases: [&[&str]; 6] = [
        &["mc-table", "--reps", "300", "--ns", "100,200"],
        &["mc-table", "--reps", "300", "--dist", "laplace", "--format", "csv"],
        &["mc-power", "--reps", "300", "--ns", "200", "--grid-points", "5"],
        &["mc-power", "--reps", "300", "--dist", "t5std", "--format", "csv", "--alphas", "4.1,4.3697,4.5"],
        &["mc-hist", "--reps", "300", "--target", "gamma"],
        &["mc-hist", "--reps", "300", "--target", "alpha", "--format", "csv"],
    ];
    let mut bytes = 0;
    for args in cases {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--seed", "2016"]);
        let one = run_bin(&full, "1")?;
        let many = run_bin(&full, "4")?;
        if one != many {
            return Err(format!("{} output differs between 1 and 4 workers", args[0]));
        }
        bytes += one.len();
    }
    Ok(format!("6 mc-* invocations byte-identical for 1 vs 4 workers ({bytes} bytes)"))
}

fn json(bytes: &[u8]) -> Result<serde_json::Value, String> {
    serde_json::from_slice(bytes).map_err(|e| e.to_string())
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csv = dir.path().join("series.csv");
    let csv_s = csv.to_str().unwrap();
    run_bin(
        &["simulate", "--phi", "0.5", "--alpha", "3.3058", "--n", "690", "--seed", "2016", "--format", "csv", "-o", csv_s],
        "1",
    )?;
    let fit = json(&run_bin(&["fit", "-i", csv_s], "1")?)?;
    let r = &fit["results"];
    let (alpha, kappa, n) = (r["alpha_hat"].as_f64().unwrap(), r["kappa_hat"].as_f64().unwrap(), r["n"].as_u64().unwrap() as usize);
    let (se_phi, se_alpha) = darwin::estimate::QmleFit::standard_errors(alpha, kappa, n);
    let se_round_trip = se_phi == r["se_phi"].as_f64().unwrap() && se_alpha == r["se_alpha"].as_f64().unwrap();

    let stab = json(&run_bin(&["stability", "-i", csv_s], "1")?)?;
    let wald = json(&run_bin(&["wald", "-i", csv_s], "1")?)?;
    let vol = json(&run_bin(&["volatility", "-i", csv_s], "1")?)?;
    let vol_len = vol["results"]["log_volatility"].as_array().map(|a| a.len()).unwrap_or(0);
    run_bin(&["dar-fit", "-i", csv_s], "1")?;

    let p = DarwinParams::new(0.5, 3.3058).unwrap();
    let seeds = 500;
    let quiet = (0..seeds)
        .filter(|&s| {
            let path = simulate_darwin(p, InnovationSpec::Gaussian, 690, InitialValue::Random, SEED + s).unwrap();
            lyapunov_estimate(&path).map(|r| r.p_value > 0.05).unwrap_or(false)
        })
        .count();
    let frac = quiet as f64 / seeds as f64;

    let hand = dir.path().join("hand.csv");
    std::fs::write(&hand, "value\n1\n2\n1\n").map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&run_bin(&["fit", "-i", hand.to_str().unwrap(), "--format", "text"], "1")?).into_owned();
    let hand_ok = text.contains("1.2500") && text.contains("0.5625");

    let ok = n == 690 && se_round_trip && vol_len == 690 && frac >= 0.90 && hand_ok && FsPath::new(csv_s).exists();
    check(
        ok,
        format!(
            "n = {n}, phi_hat {:.4}, gamma_hat {:.4}, T {:.4}, Wald p {:.4}; se round-trip {se_round_trip}; p > 0.05 in {:.1}% of {seeds} seeds",
            r["phi_hat"].as_f64().unwrap_or(f64::NAN),
            stab["results"]["gamma_hat"].as_f64().unwrap_or(f64::NAN),
            stab["results"]["t_stat"].as_f64().unwrap_or(f64::NAN),
            wald["results"]["p_value"].as_f64().unwrap_or(f64::NAN),
            100.0 * frac
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("tabulated exponent and variance", table1),
        ("stability boundary calibration", calibration),
        ("asymptotic sd exactness", asd_exactness),
        ("estimator Monte Carlo summary", table2_monte_carlo),
        ("unbiasedness", unbiasedness),
        ("stability test size and power", size_and_power),
        ("functional CLT", functional_clt),
        ("exact identities", identities),
        ("worker-count determinism", determinism),
        ("end-to-end workflow", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
