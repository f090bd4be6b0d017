use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::CommandFactory;
use serde::Serialize;
use serde_json::json;

use darwin::estimate::{
    dar_qmle_fit, log_volatility, lyapunov_estimate, plugin_lyapunov, qmle_fit, residual_acf, wald_test, AcfResult,
    DarFitOptions, QmleFit,
};
use darwin::io::{self, ColumnRef, IngestConfig, Transform};
use darwin::montecarlo::{
    default_power_grid, run_estimation_study, run_size_power, sampling_distribution, table1_alphas, PowerConfig,
    StudyConfig, Target,
};
use darwin::process::{auxiliary_from_innovations, simulate_darwin, PathMeta};
use darwin::rng::stream_rng;
use darwin::theory::{
    asymptotic_sd_for, calibrate_alpha_to, clt_path_check, lyapunov_moments, MomentMethod,
};
use darwin::{DarParams, DarwinParams, InitialValue, InnovationSpec, Observations, Path, Series};

use crate::args::{Cli, Command, InputArgs, MethodArg, ModelArgs, StudyArgs, TargetArg};
use crate::output::{f4, Report, Seeds, Table};
use crate::CliError;

pub fn dispatch(cmd: Command) -> Result<Report, CliError> {
    match cmd {
        Command::Simulate { model, n, y0, auxiliary, common } => simulate(&model, n, &y0, auxiliary, common.seed),
        Command::Fit { input, acf_lags, residuals_csv, acf_csv, .. } => fit(&input, acf_lags, residuals_csv, acf_csv),
        Command::Stability { input, level, .. } => stability(&input, level),
        Command::Wald { input, gamma, r, .. } => wald(&input, &gamma, &r),
        Command::Calibrate { phi, dist, target, lo, hi, .. } => calibrate(phi, &dist, target, lo, hi),
        Command::Theory { model, method, draws, n, common } => theory(&model, method, draws, n, common.seed),
        Command::McTable { study, common } => mc_table(&study, common.seed),
        Command::McPower { study, grid_points, half_width, level, common } => {
            mc_power(&study, grid_points, half_width, level, common.seed)
        }
        Command::McHist { study, target, common } => mc_hist(&study, target, common.seed),
        Command::CltCheck { model, n, reps, grid, common } => clt_check(&model, n, reps, &grid, common.seed),
        Command::DarFit { input, init, .. } => dar_fit(&input, init.as_deref()),
        Command::Volatility { input, .. } => volatility(&input),
        Command::Man { .. } => man(),
    }
}

/// Failures computed from loaded data are data errors, whatever the core calls them.
fn on_data<T>(r: darwin::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Data(e.to_string()))
}

fn spec(s: &str) -> Result<InnovationSpec, CliError> {
    InnovationSpec::from_str(s).map_err(CliError::from)
}

fn params(m: &ModelArgs) -> Result<(DarwinParams, InnovationSpec), CliError> {
    Ok((DarwinParams::new(m.phi, m.alpha)?, spec(&m.dist)?))
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| CliError::Usage(format!("bad {what} entry '{t}'"))))
        .collect()
}

/// Loaded input: a simulated path keeps its exact log factors.
enum Data {
    Path(Path),
    Series(Series),
}

impl Data {
    fn obs(&self) -> &dyn Observations {
        match self {
            Data::Path(p) => p,
            Data::Series(s) => s,
        }
    }

    fn series(&self) -> Result<Series, CliError> {
        match self {
            Data::Path(p) => on_data(Series::from_path(p)),
            Data::Series(s) => Ok(s.clone()),
        }
    }
}

#[derive(Serialize)]
struct InputConfig {
    input: PathBuf,
    kind: &'static str,
    column: Option<ColumnRef>,
    transform: Transform,
    drop_na: bool,
    n: usize,
}

fn load(args: &InputArgs) -> Result<(Data, InputConfig), CliError> {
    let transform = Transform::from_str(&args.transform)?;
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.input.display())))?;
    let header = text.lines().next().unwrap_or("");
    if args.column.is_none() && io::looks_like_path_csv(header) {
        if transform != Transform::None {
            return Err(CliError::Usage("--transform applies to series input, not to a path file".into()));
        }
        let path = on_data(io::read_path_csv(text.as_bytes()))?;
        let cfg = InputConfig { input: args.input.clone(), kind: "path", column: None, transform, drop_na: false, n: path.n() };
        return Ok((Data::Path(path), cfg));
    }
    let column = match &args.column {
        Some(c) => ColumnRef::parse(c),
        None => {
            let cols: Vec<&str> = header.split(',').map(str::trim).collect();
            if cols.contains(&"value") {
                ColumnRef::Name("value".into())
            } else if cols.len() == 1 {
                ColumnRef::Index(0)
            } else {
                return Err(CliError::Usage("input has several columns; choose one with --column".into()));
            }
        }
    };
    let cfg = IngestConfig { path: args.input.clone(), column: column.clone(), transform, drop_na: args.drop_na };
    let raw = io::read_column(text.as_bytes(), &cfg.column, cfg.drop_na)?;
    let series = on_data(io::transform_series(&raw, transform))?;
    let info = InputConfig {
        input: args.input.clone(),
        kind: "series",
        column: Some(column),
        transform,
        drop_na: args.drop_na,
        n: series.n(),
    };
    Ok((Data::Series(series), info))
}

fn simulate(model: &ModelArgs, n: usize, y0: &str, auxiliary: bool, seed: u64) -> Result<Report, CliError> {
    let (p, spec) = params(model)?;
    let init = if y0.eq_ignore_ascii_case("random") {
        InitialValue::Random
    } else {
        InitialValue::Fixed(y0.parse().map_err(|_| CliError::Usage(format!("bad --y0 '{y0}'")))?)
    };
    let path = if auxiliary {
        if n < 1 {
            return Err(CliError::Usage("n must be at least 1".into()));
        }
        let mut rng = stream_rng(seed, 0);
        let x0 = match init {
            InitialValue::Random => InnovationSpec::Gaussian.draw(&mut rng).abs(),
            InitialValue::Fixed(v) => v.abs(),
        };
        let mut eta = vec![0.0; n];
        spec.fill(&mut rng, &mut eta);
        let raw = auxiliary_from_innovations(p, x0, &eta)?;
        let meta = PathMeta { spec: Some(spec), seed: Some(seed), ..raw.meta().clone() };
        Path::from_parts(raw.signs().to_vec(), raw.logabs().to_vec(), meta)?
    } else {
        simulate_darwin(p, spec, n, init, seed)?
    };
    let mut csv = Vec::new();
    io::write_path_csv(&path, &mut csv)?;
    let mut text = String::from("t\tsign\tlogabs\tlevel\n");
    for t in 0..path.signs().len() {
        let level = path.level(t).map(f4).unwrap_or_else(|| "-".into());
        let _ = writeln!(text, "{t}\t{}\t{}\t{level}", path.signs()[t], f4(path.logabs()[t]));
    }
    let config = json!({ "phi": p.phi, "alpha": p.alpha, "dist": spec, "n": n, "y0": init, "auxiliary": auxiliary });
    let mut report = Report::new("simulate", config, io::PathEnvelope::from(&path))?;
    report.seeds = Some(Seeds::single(seed));
    report.csv = csv;
    report.text = text;
    Ok(report)
}

#[derive(Serialize)]
struct FitResults<'a> {
    phi_hat: f64,
    alpha_hat: f64,
    alpha_star: f64,
    kappa_hat: f64,
    se_phi: f64,
    se_alpha: f64,
    sigma_matrix: [[f64; 2]; 2],
    plugin_gamma: Option<f64>,
    n: usize,
    residual_acf: Option<&'a AcfResult>,
    squared_acf: Option<&'a AcfResult>,
    residuals: &'a [f64],
    innovations: &'a [f64],
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn fit(input: &InputArgs, acf_lags: usize, residuals_csv: Option<PathBuf>, acf_csv: Option<PathBuf>) -> Result<Report, CliError> {
    let (data, cfg) = load(input)?;
    let f: QmleFit = on_data(qmle_fit(data.obs()))?;
    let mut warnings = Vec::new();
    let plugin = match plugin_lyapunov(&f) {
        Ok(p) => {
            if p.skipped > 0 {
                warnings.push(format!("plug-in exponent skipped {} vanishing terms", p.skipped));
            }
            Some(p.value)
        }
        Err(e) => {
            warnings.push(format!("plug-in exponent unavailable: {e}"));
            None
        }
    };
    let lags = acf_lags.min(f.n / 2);
    if acf_lags > lags {
        warnings.push(format!("ACF lags capped at {lags} (n/2)"));
    }
    let mut acf_or_warn = |squared: bool| {
        if lags == 0 {
            return None;
        }
        residual_acf(&f.innovations, lags, squared)
            .map_err(|e| warnings.push(format!("{} ACF unavailable: {e}", if squared { "squared" } else { "residual" })))
            .ok()
    };
    let (acf, acf2) = (acf_or_warn(false), acf_or_warn(true));

    if let Some(p) = residuals_csv {
        let mut t = Table::new(&["t", "residual", "innovation"])?;
        for (i, (r, e)) in f.residuals.iter().zip(&f.innovations).enumerate() {
            t.row([(i + 1).to_string(), r.to_string(), e.to_string()])?;
        }
        write_file(&p, &t.finish()?)?;
    }
    if let Some(p) = acf_csv {
        let cell = |r: &Option<AcfResult>, k: usize, pacf: bool| {
            r.as_ref().map(|a| if pacf { a.pacf[k] } else { a.acf[k] }.to_string()).unwrap_or_default()
        };
        let rows = if acf.is_some() || acf2.is_some() { lags } else { 0 };
        let mut t = Table::new(&["lag", "acf", "pacf", "acf_sq", "pacf_sq"])?;
        for k in 0..rows {
            t.row([(k + 1).to_string(), cell(&acf, k, false), cell(&acf, k, true), cell(&acf2, k, false), cell(&acf2, k, true)])?;
        }
        write_file(&p, &t.finish()?)?;
    }

    let mut t = Table::new(&["parameter", "estimate", "se"])?;
    t.row(["phi".to_string(), f.phi_hat.to_string(), f.se_phi.to_string()])?;
    t.row(["alpha".to_string(), f.alpha_hat.to_string(), f.se_alpha.to_string()])?;
    t.row(["alpha_star".to_string(), f.alpha_star.to_string(), String::new()])?;
    t.row(["kappa".to_string(), f.kappa_hat.to_string(), String::new()])?;
    if let Some(g) = plugin {
        t.row(["plugin_gamma".to_string(), g.to_string(), String::new()])?;
    }
    let mut text = format!("n = {}\n", f.n);
    let _ = writeln!(text, "phi      {} ({})", f4(f.phi_hat), f4(f.se_phi));
    let _ = writeln!(text, "alpha    {} ({})", f4(f.alpha_hat), f4(f.se_alpha));
    let _ = writeln!(text, "alpha*   {}", f4(f.alpha_star));
    let _ = writeln!(text, "kappa    {}", f4(f.kappa_hat));
    if let Some(g) = plugin {
        let _ = writeln!(text, "gamma~   {}", f4(g));
    }
    if acf.is_some() || acf2.is_some() {
        let cell = |r: &Option<AcfResult>, k: usize, pacf: bool| {
            r.as_ref().map(|a| f4(if pacf { a.pacf[k] } else { a.acf[k] })).unwrap_or_else(|| "-".into())
        };
        let _ = writeln!(text, "lag\tacf\tpacf\tacf(sq)\tpacf(sq)");
        for k in 0..lags {
            let _ = writeln!(text, "{}\t{}\t{}\t{}\t{}", k + 1, cell(&acf, k, false), cell(&acf, k, true), cell(&acf2, k, false), cell(&acf2, k, true));
        }
    }
    let results = FitResults {
        phi_hat: f.phi_hat,
        alpha_hat: f.alpha_hat,
        alpha_star: f.alpha_star,
        kappa_hat: f.kappa_hat,
        se_phi: f.se_phi,
        se_alpha: f.se_alpha,
        sigma_matrix: f.sigma_matrix,
        plugin_gamma: plugin,
        n: f.n,
        residual_acf: acf.as_ref(),
        squared_acf: acf2.as_ref(),
        residuals: &f.residuals,
        innovations: &f.innovations,
    };
    let mut report = Report::new("fit", json!({ "input": cfg, "acf_lags": lags }), results)?;
    report.warnings = warnings;
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn stability(input: &InputArgs, level: f64) -> Result<Report, CliError> {
    let (data, cfg) = load(input)?;
    let s = on_data(lyapunov_estimate(data.obs()))?;
    let reject = s.rejects(level)?;
    let mut t = Table::new(&["gamma_hat", "sigma2_hat", "t_stat", "p_value", "n", "reject"])?;
    t.row([s.gamma_hat.to_string(), s.sigma2_hat.to_string(), s.t_stat.to_string(), s.p_value.to_string(), s.n.to_string(), reject.to_string()])?;
    let text = format!(
        "gamma_hat  {}\nsigma2_hat {}\nT          {}\np-value    {}\nn          {}\nreject stability boundary at {}: {}\n",
        f4(s.gamma_hat),
        f4(s.sigma2_hat),
        f4(s.t_stat),
        f4(s.p_value),
        s.n,
        level,
        if reject { "yes" } else { "no" }
    );
    let mut results = serde_json::to_value(s).map_err(darwin::DarwinError::from)?;
    results["reject"] = json!(reject);
    let mut report = Report::new("stability", json!({ "input": cfg, "level": level }), results)?;
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn wald(input: &InputArgs, gamma: &str, r: &str) -> Result<Report, CliError> {
    let rows: Vec<[f64; 2]> = gamma
        .split(';')
        .map(|row| {
            let v: Vec<f64> = parse_list(row, "--gamma")?;
            <[f64; 2]>::try_from(v).map_err(|_| CliError::Usage("each --gamma row needs exactly 2 entries".into()))
        })
        .collect::<Result<_, _>>()?;
    let r: Vec<f64> = parse_list(r, "--r")?;
    let (data, cfg) = load(input)?;
    let f = on_data(qmle_fit(data.obs()))?;
    let w = wald_test(&f, &rows, &r)?;
    let mut t = Table::new(&["w_stat", "df", "p_value"])?;
    t.row([w.w_stat.to_string(), w.df.to_string(), w.p_value.to_string()])?;
    let text = format!("W       {}\ndf      {}\np-value {}\n", f4(w.w_stat), w.df, f4(w.p_value));
    let mut report = Report::new("wald", json!({ "input": cfg, "gamma": rows, "r": r }), &w)?;
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn calibrate(phi: f64, dist: &str, target: f64, lo: f64, hi: f64) -> Result<Report, CliError> {
    let spec = spec(dist)?;
    let c = calibrate_alpha_to(phi, spec, target, Some((lo, hi)))?;
    let mut t = Table::new(&["phi", "dist", "target", "alpha", "gamma0", "iterations"])?;
    t.row([phi.to_string(), spec.name().to_string(), target.to_string(), c.alpha.to_string(), c.gamma0.to_string(), c.iterations.to_string()])?;
    let text = format!("{}\n", f4(c.alpha));
    let config = json!({ "phi": phi, "dist": spec, "target": target, "bracket": [lo, hi] });
    let mut report = Report::new("calibrate", config, c)?;
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn theory(model: &ModelArgs, method: MethodArg, draws: usize, n: Option<usize>, seed: u64) -> Result<Report, CliError> {
    let (p, spec) = params(model)?;
    let m = match method {
        MethodArg::Quad => MomentMethod::Quadrature,
        MethodArg::Mc => MomentMethod::MonteCarlo { draws, seed },
    };
    let prof = lyapunov_moments(p, spec, m)?;
    let asd = n.map(|n| asymptotic_sd_for(p, spec, &prof, n)).transpose()?;
    let mut warnings = Vec::new();
    if prof.fallback {
        warnings.push("quadrature did not converge; moments are Monte Carlo estimates".into());
    }
    let mut header = vec!["phi", "alpha", "dist", "gamma0", "sigma2", "err_estimate"];
    let mut row = vec![p.phi.to_string(), p.alpha.to_string(), spec.name().to_string(), prof.gamma0.to_string(), prof.sigma2.to_string(), prof.err_estimate.to_string()];
    let mut text = format!("gamma0  {}\nsigma2  {}\n", f4(prof.gamma0), f4(prof.sigma2));
    if let (Some(a), Some(n)) = (asd, n) {
        header.extend(["n", "sd_phi", "sd_alpha", "sd_gamma"]);
        row.extend([n.to_string(), a.sd_phi.to_string(), a.sd_alpha.to_string(), a.sd_gamma.to_string()]);
        let _ = writeln!(text, "asd(n={n})  phi {}  alpha {}  gamma {}", f4(a.sd_phi), f4(a.sd_alpha), f4(a.sd_gamma));
    }
    let mut t = Table::new(&header)?;
    t.row(row)?;
    let config = json!({ "phi": p.phi, "alpha": p.alpha, "dist": spec, "method": m, "n": n });
    let mut report = Report::new("theory", config, json!({ "profile": prof, "asymptotic_sd": asd, "kappa4": spec.kurtosis() }))?;
    if method == MethodArg::Mc || prof.fallback {
        report.seeds = Some(Seeds { master_seed: seed, streams: "chacha8, one stream per 65536-draw chunk" });
    }
    report.warnings = warnings;
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn study_config(s: &StudyArgs, seed: u64) -> Result<StudyConfig, CliError> {
    let spec = spec(&s.dist)?;
    let alpha_list = match &s.alphas {
        Some(a) => parse_list(a, "--alphas")?,
        None => table1_alphas(spec).to_vec(),
    };
    let cfg = StudyConfig {
        spec,
        phi: s.phi,
        alpha_list,
        n_list: parse_list(&s.ns, "--ns")?,
        replications: s.reps,
        master_seed: seed,
        y0: InitialValue::Random,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn mc_table(s: &StudyArgs, seed: u64) -> Result<Report, CliError> {
    let cfg = study_config(s, seed)?;
    let table = run_estimation_study(&cfg)?;
    let mut t = Table::new(&[
        "dist", "alpha0", "n", "gamma0", "sigma2", "em_phi", "esd_phi", "asd_phi", "em_alpha", "esd_alpha", "asd_alpha",
        "em_alpha_star", "esd_alpha_star", "em_gamma", "esd_gamma", "asd_gamma", "replications", "exclusions",
    ])?;
    let mut text = String::from("alpha0\tn\tgamma0\tphi EM/ESD/ASD\t\t\talpha EM/ESD/ASD\t\t\tgamma EM/ESD/ASD\n");
    let mut warnings = Vec::new();
    for r in &table.rows {
        t.row([
            r.spec.name().to_string(),
            r.alpha0.to_string(),
            r.n.to_string(),
            r.gamma0.to_string(),
            r.sigma2.to_string(),
            r.phi.em.to_string(),
            r.phi.esd.to_string(),
            r.phi.asd.to_string(),
            r.alpha.em.to_string(),
            r.alpha.esd.to_string(),
            r.alpha.asd.to_string(),
            r.alpha_star.em.to_string(),
            r.alpha_star.esd.to_string(),
            r.gamma.em.to_string(),
            r.gamma.esd.to_string(),
            r.gamma.asd.to_string(),
            r.replications.to_string(),
            r.exclusions.to_string(),
        ])?;
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            f4(r.alpha0),
            r.n,
            f4(r.gamma0),
            f4(r.phi.em),
            f4(r.phi.esd),
            f4(r.phi.asd),
            f4(r.alpha.em),
            f4(r.alpha.esd),
            f4(r.alpha.asd),
            f4(r.gamma.em),
            f4(r.gamma.esd),
            f4(r.gamma.asd)
        );
        if r.exclusions > 0 {
            warnings.push(format!("alpha0={} n={}: {} replications excluded", r.alpha0, r.n, r.exclusions));
        }
    }
    let mut report = Report::new("mc-table", &cfg, &table.rows)?;
    report.seeds = Some(Seeds::per_replication(seed));
    report.warnings = warnings;
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn mc_power(s: &StudyArgs, points: usize, half_width: f64, level: f64, seed: u64) -> Result<Report, CliError> {
    let spec = spec(&s.dist)?;
    let alpha_grid = match &s.alphas {
        Some(a) => parse_list(a, "--alphas")?,
        None => default_power_grid(s.phi, spec, points, half_width)?,
    };
    let cfg = PowerConfig {
        spec,
        phi: s.phi,
        alpha_grid,
        n_list: parse_list(&s.ns, "--ns")?,
        replications: s.reps,
        master_seed: seed,
        level,
        y0: InitialValue::Random,
    };
    let table = run_size_power(&cfg)?;
    let mut t = Table::new(&["dist", "alpha0", "gamma0", "n", "rejections", "replications", "exclusions", "frequency"])?;
    let mut text = format!("critical value {}\nalpha0\tgamma0\tn\trejection rate\n", f4(table.critical_value));
    let mut warnings = Vec::new();
    for r in &table.rows {
        t.row([
            spec.name().to_string(),
            r.alpha0.to_string(),
            r.gamma0.to_string(),
            r.n.to_string(),
            r.rejections.to_string(),
            r.replications.to_string(),
            r.exclusions.to_string(),
            r.frequency.to_string(),
        ])?;
        let _ = writeln!(text, "{}\t{}\t{}\t{}", f4(r.alpha0), f4(r.gamma0), r.n, f4(r.frequency));
        if r.exclusions > 0 {
            warnings.push(format!("alpha0={} n={}: {} replications excluded", r.alpha0, r.n, r.exclusions));
        }
    }
    let mut report = Report::new("mc-power", &cfg, json!({ "critical_value": table.critical_value, "rows": table.rows }))?;
    report.seeds = Some(Seeds { master_seed: seed, streams: "chacha8, stream = n_index << 32 | replication, shared across alpha" });
    report.warnings = warnings;
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn mc_hist(s: &StudyArgs, target: TargetArg, seed: u64) -> Result<Report, CliError> {
    let cfg = study_config(s, seed)?;
    let target = match target {
        TargetArg::Gamma => Target::GammaHat,
        TargetArg::Phi => Target::PhiHat,
        TargetArg::Alpha => Target::AlphaHat,
    };
    let dists = sampling_distribution(&cfg, target)?;
    let mut t = Table::new(&["alpha0", "n", "index", "value", "overlay_mean", "overlay_variance"])?;
    let mut text = String::from("alpha0\tn\tmean\tvariance\toverlay variance\n");
    let mut warnings = Vec::new();
    for d in &dists {
        for (i, v) in d.values.iter().enumerate() {
            t.row([d.alpha0.to_string(), d.n.to_string(), i.to_string(), v.to_string(), d.overlay_mean.to_string(), d.overlay_variance.to_string()])?;
        }
        let (mean, sd) = darwin::numeric::mean_sd(&d.values);
        let _ = writeln!(text, "{}\t{}\t{}\t{}\t{}", f4(d.alpha0), d.n, f4(mean), f4(sd * sd), f4(d.overlay_variance));
        if d.exclusions > 0 {
            warnings.push(format!("alpha0={} n={}: {} replications excluded", d.alpha0, d.n, d.exclusions));
        }
    }
    let mut report = Report::new("mc-hist", json!({ "study": cfg, "target": target }), &dists)?;
    report.seeds = Some(Seeds::per_replication(seed));
    report.warnings = warnings;
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn clt_check(model: &ModelArgs, n: usize, reps: usize, grid: &str, seed: u64) -> Result<Report, CliError> {
    let (p, spec) = params(model)?;
    let s_grid: Vec<f64> = parse_list(grid, "--grid")?;
    let prof = lyapunov_moments(p, spec, MomentMethod::Quadrature)?;
    let rep = clt_path_check(p, spec, &prof, n, reps, &s_grid, seed)?;
    let mut t = Table::new(&["s", "variance", "target_variance", "variance_ratio", "ks_stat", "ks_p", "pass"])?;
    let mut text = format!("gamma0 {}  sigma2 {}\ns\tvar\tratio\tKS p\tpass\n", f4(rep.gamma0), f4(rep.sigma2));
    for (i, &s) in rep.s_grid.iter().enumerate() {
        t.row([
            s.to_string(),
            rep.variances[i].to_string(),
            (rep.sigma2 * s).to_string(),
            rep.variance_ratios[i].to_string(),
            rep.ks[i].stat.to_string(),
            rep.ks[i].p.to_string(),
            rep.pass[i].to_string(),
        ])?;
        let _ = writeln!(text, "{}\t{}\t{}\t{}\t{}", f4(s), f4(rep.variances[i]), f4(rep.variance_ratios[i]), f4(rep.ks[i].p), rep.pass[i]);
    }
    let config = json!({ "phi": p.phi, "alpha": p.alpha, "dist": spec, "n": n, "replications": reps, "s_grid": s_grid });
    let mut report = Report::new("clt-check", config, &rep)?;
    report.seeds = Some(Seeds { master_seed: seed, streams: "chacha8, stream = replication" });
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn dar_fit(input: &InputArgs, init: Option<&str>) -> Result<Report, CliError> {
    let (data, cfg) = load(input)?;
    let series = data.series()?;
    let start = match init {
        Some(s) => {
            let v: Vec<f64> = parse_list(s, "--init")?;
            let [phi, omega, alpha] = <[f64; 3]>::try_from(v).map_err(|_| CliError::Usage("--init needs phi,omega,alpha".into()))?;
            DarParams::new(phi, omega, alpha)?
        }
        None => {
            let q = on_data(qmle_fit(&series))?;
            let y2 = darwin::numeric::mean(&series.values().iter().map(|y| y * y).collect::<Vec<_>>());
            DarParams { phi: q.phi_hat, omega: 0.1 * y2, alpha: q.alpha_hat.min(0.5) }
        }
    };
    let f = on_data(dar_qmle_fit(&series, start, &DarFitOptions::default()))?;
    let mut warnings = Vec::new();
    if !f.converged {
        warnings.push(format!("simplex stopped after {} iterations without meeting tolerances", f.iterations));
    }
    if f.se.is_none() {
        warnings.push("information matrix not invertible; no standard errors".into());
    }
    let se = f.se.map(|s| s.map(|v| v.to_string())).unwrap_or_default();
    let lam = f.lambda_hat;
    let mut t = Table::new(&["parameter", "estimate", "se"])?;
    for (i, (name, v)) in [("phi", lam.phi), ("omega", lam.omega), ("alpha", lam.alpha)].into_iter().enumerate() {
        t.row([name.to_string(), v.to_string(), se.get(i).cloned().unwrap_or_default()])?;
    }
    t.row(["loglik".to_string(), f.loglik.to_string(), String::new()])?;
    let fmt_se = |i: usize| f.se.map(|s| format!(" ({})", f4(s[i]))).unwrap_or_default();
    let text = format!(
        "phi    {}{}\nomega  {}{}\nalpha  {}{}\nloglik {}\n",
        f4(lam.phi),
        fmt_se(0),
        f4(lam.omega),
        fmt_se(1),
        f4(lam.alpha),
        fmt_se(2),
        f4(f.loglik)
    );
    let mut report = Report::new("dar-fit", json!({ "input": cfg, "init": start }), &f)?;
    report.warnings = warnings;
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn volatility(input: &InputArgs) -> Result<Report, CliError> {
    let (data, cfg) = load(input)?;
    let f = on_data(qmle_fit(data.obs()))?;
    let lv = log_volatility(&f, data.obs());
    let mut t = Table::new(&["t", "log_volatility"])?;
    let mut text = String::from("t\tlog volatility\n");
    for (i, v) in lv.iter().enumerate() {
        t.row([(i + 1).to_string(), v.to_string()])?;
        let _ = writeln!(text, "{}\t{}", i + 1, f4(*v));
    }
    let mut report = Report::new("volatility", json!({ "input": cfg }), json!({ "alpha_hat": f.alpha_hat, "log_volatility": lv }))?;
    report.csv = t.finish()?;
    report.text = text;
    Ok(report)
}

fn man() -> Result<Report, CliError> {
    let mut buf = Vec::new();
    clap_mangen::Man::new(Cli::command())
        .render(&mut buf)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let mut report = Report::new("man", json!({}), json!({}))?;
    report.raw = Some(buf);
    Ok(report)
}
