//! Exact simulation of DARWIN(1) paths and the auxiliary positive process,
//! stored in log-sign form so explosive or collapsing paths never overflow.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DarwinError, Result};
use crate::innovations::InnovationSpec;
use crate::rng::{stream_rng, StreamRng};

/// `(φ, α)` of `y_t = φ y_{t-1} + η_t sqrt(α y²_{t-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarwinParams {
    pub phi: f64,
    pub alpha: f64,
}

impl DarwinParams {
    pub fn new(phi: f64, alpha: f64) -> Result<Self> {
        if !phi.is_finite() || !alpha.is_finite() || alpha <= 0.0 {
            return Err(DarwinError::InvalidArgument(format!(
                "DARWIN parameters need finite phi and alpha > 0 (got phi={phi}, alpha={alpha})"
            )));
        }
        Ok(Self { phi, alpha })
    }
}

/// `(φ, ω, α)` of `y_t = φ y_{t-1} + η_t sqrt(ω + α y²_{t-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarParams {
    pub phi: f64,
    pub omega: f64,
    pub alpha: f64,
}

impl DarParams {
    pub fn new(phi: f64, omega: f64, alpha: f64) -> Result<Self> {
        let ok = phi.is_finite()
            && omega.is_finite()
            && alpha.is_finite()
            && omega >= 0.0
            && alpha >= 0.0
            && omega + alpha > 0.0;
        if !ok {
            return Err(DarwinError::InvalidArgument(format!(
                "DAR parameters need omega >= 0, alpha >= 0, omega + alpha > 0 (got {phi}, {omega}, {alpha})"
            )));
        }
        Ok(Self { phi, omega, alpha })
    }
}

/// How `y_0` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialValue {
    Fixed(f64),
    /// Standard normal draw taken from the path's own stream before any innovation.
    Random,
}

impl InitialValue {
    fn resolve(self, rng: &mut StreamRng) -> Result<f64> {
        let y0 = match self {
            InitialValue::Fixed(v) => v,
            InitialValue::Random => rng.sample(StandardNormal),
        };
        if y0 == 0.0 || !y0.is_finite() {
            return Err(DarwinError::InvalidArgument(format!(
                "initial value must be finite and nonzero (got {y0})"
            )));
        }
        Ok(y0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Darwin,
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMeta {
    pub kind: PathKind,
    pub params: Option<DarwinParams>,
    pub spec: Option<InnovationSpec>,
    pub seed: Option<u64>,
    pub y0: f64,
}

/// A trajectory `y_0..y_n` as per-step signs and natural-log magnitudes.
///
/// `steps[t-1] = logabs[t] - logabs[t-1]` is kept as computed during the
/// recursion so that estimators see the exact log factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    signs: Vec<i8>,
    logabs: Vec<f64>,
    steps: Vec<f64>,
    meta: PathMeta,
}

impl Path {
    /// Rebuilds a path from stored signs and log magnitudes.
    pub fn from_parts(signs: Vec<i8>, logabs: Vec<f64>, meta: PathMeta) -> Result<Self> {
        if signs.len() != logabs.len() || signs.len() < 2 {
            return Err(DarwinError::InvalidArgument(
                "path needs equal-length signs and logabs with at least two entries".into(),
            ));
        }
        if let Some(i) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(DarwinError::Data { row: i, reason: "sign must be -1 or +1".into() });
        }
        if let Some(i) = logabs.iter().position(|v| !v.is_finite()) {
            return Err(DarwinError::NonFinite { index: i });
        }
        let steps = logabs.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self { signs, logabs, steps, meta })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn logabs(&self) -> &[f64] {
        &self.logabs
    }

    /// `log|y_t / y_{t-1}|`, `t = 1..n`.
    pub fn log_steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn meta(&self) -> &PathMeta {
        &self.meta
    }

    /// Number of transitions `n` (the path holds `n + 1` points).
    pub fn n(&self) -> usize {
        self.steps.len()
    }

    /// `y_t / y_{t-1}` without forming levels.
    pub fn ratios(&self) -> Vec<f64> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, &s)| f64::from(self.signs[i + 1] * self.signs[i]) * s.exp())
            .collect()
    }

    pub fn to_levels(&self, policy: OverflowPolicy) -> Result<Levels> {
        let mut saturated = false;
        let mut values = Vec::with_capacity(self.logabs.len());
        for (t, (&s, &la)) in self.signs.iter().zip(&self.logabs).enumerate() {
            let mag = la.exp();
            let sign = f64::from(s);
            if mag.is_infinite() || mag < f64::MIN_POSITIVE {
                match policy {
                    OverflowPolicy::Error if mag.is_infinite() => {
                        return Err(DarwinError::Overflow { index: t })
                    }
                    OverflowPolicy::Error => return Err(DarwinError::ZeroLevel { index: t }),
                    OverflowPolicy::Saturate => saturated = true,
                }
            }
            values.push(sign * mag);
        }
        Ok(Levels { values, saturated })
    }

    /// The level at `t` when it is a normal, finite float.
    pub fn level(&self, t: usize) -> Option<f64> {
        let mag = self.logabs[t].exp();
        (mag.is_finite() && mag >= f64::MIN_POSITIVE).then(|| f64::from(self.signs[t]) * mag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverflowPolicy {
    Error,
    /// Out-of-range magnitudes become signed infinity (or signed zero on
    /// underflow) and `Levels::saturated` is set.
    Saturate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Levels {
    pub values: Vec<f64>,
    pub saturated: bool,
}

/// Observed data `y_0..y_n`: at least two finite, nonzero values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Series {
    values: Vec<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(DarwinError::InvalidArgument("series needs at least two values".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(DarwinError::NonFinite { index: i });
            }
            if v == 0.0 {
                return Err(DarwinError::ZeroLevel { index: i });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Series::new(self.values.iter().map(|v| v * c).collect())
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Series::new(path.to_levels(OverflowPolicy::Error)?.values)
    }
}

impl TryFrom<Vec<f64>> for Series {
    type Error = DarwinError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Series::new(v)
    }
}

impl From<Series> for Vec<f64> {
    fn from(s: Series) -> Self {
        s.values
    }
}

/// Anything the estimators can read transitions from.
pub trait Observations {
    /// Number of transitions.
    fn n(&self) -> usize;
    /// `y_t / y_{t-1}`, `t = 1..n`.
    fn ratios(&self) -> Result<Vec<f64>>;
    /// `log|y_t / y_{t-1}|`, `t = 1..n`.
    fn log_abs_ratios(&self) -> Result<Vec<f64>>;
    /// `sign(y_{t-1})`, `t = 1..n`.
    fn lag_signs(&self) -> Vec<i8>;
    /// `log|y_t|`, `t = 0..n`.
    fn log_levels(&self) -> Vec<f64>;
}

impl Observations for Series {
    fn n(&self) -> usize {
        Series::n(self)
    }

    fn ratios(&self) -> Result<Vec<f64>> {
        self.values
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                if w[0] == 0.0 {
                    Err(DarwinError::ZeroLevel { index: i })
                } else {
                    Ok(w[1] / w[0])
                }
            })
            .collect()
    }

    fn log_abs_ratios(&self) -> Result<Vec<f64>> {
        Ok(self.ratios()?.into_iter().map(|r| r.abs().ln()).collect())
    }

    fn lag_signs(&self) -> Vec<i8> {
        self.values[..self.values.len() - 1]
            .iter()
            .map(|&v| if v > 0.0 { 1 } else { -1 })
            .collect()
    }

    fn log_levels(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.abs().ln()).collect()
    }
}

impl Observations for Path {
    fn n(&self) -> usize {
        Path::n(self)
    }

    fn ratios(&self) -> Result<Vec<f64>> {
        Ok(Path::ratios(self))
    }

    fn log_abs_ratios(&self) -> Result<Vec<f64>> {
        Ok(self.steps.clone())
    }

    fn lag_signs(&self) -> Vec<i8> {
        self.signs[..self.signs.len() - 1].to_vec()
    }

    fn log_levels(&self) -> Vec<f64> {
        self.logabs.clone()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(DarwinError::InvalidArgument("path length n must be at least 1".into()));
    }
    Ok(())
}

/// Simulates `y_0..y_n` from stream 0 of `seed`.
pub fn simulate_darwin(
    params: DarwinParams,
    spec: InnovationSpec,
    n: usize,
    y0: InitialValue,
    seed: u64,
) -> Result<Path> {
    let mut rng = stream_rng(seed, 0);
    let mut path = simulate_darwin_rng(params, spec, n, y0, &mut rng)?;
    path.meta.seed = Some(seed);
    Ok(path)
}

/// Simulates from a caller-owned stream; `y_0` (if random) is drawn first.
pub fn simulate_darwin_rng(
    params: DarwinParams,
    spec: InnovationSpec,
    n: usize,
    y0: InitialValue,
    rng: &mut StreamRng,
) -> Result<Path> {
    check_n(n)?;
    let y0 = y0.resolve(rng)?;
    let mut eta = vec![0.0; n];
    spec.fill(rng, &mut eta);
    let mut path = darwin_from_innovations(params, y0, &eta)?;
    path.meta.spec = Some(spec);
    Ok(path)
}

/// Runs the DARWIN recursion on given innovations.
pub fn darwin_from_innovations(params: DarwinParams, y0: f64, eta: &[f64]) -> Result<Path> {
    check_n(eta.len())?;
    if y0 == 0.0 || !y0.is_finite() {
        return Err(DarwinError::InvalidArgument(format!(
            "initial value must be finite and nonzero (got {y0})"
        )));
    }
    let scale = params.alpha.sqrt();
    let n = eta.len();
    let mut signs = Vec::with_capacity(n + 1);
    let mut logabs = Vec::with_capacity(n + 1);
    let mut steps = Vec::with_capacity(n);
    let mut sign: i8 = if y0 > 0.0 { 1 } else { -1 };
    let mut la = y0.abs().ln();
    signs.push(sign);
    logabs.push(la);
    for (i, &e) in eta.iter().enumerate() {
        let factor = params.phi * f64::from(sign) + e * scale;
        let step = checked_log_factor(factor, i + 1)?;
        sign = if factor < 0.0 { -1 } else { 1 };
        la += step;
        signs.push(sign);
        logabs.push(la);
        steps.push(step);
    }
    Ok(Path {
        signs,
        logabs,
        steps,
        meta: PathMeta { kind: PathKind::Darwin, params: Some(params), spec: None, seed: None, y0 },
    })
}

fn checked_log_factor(factor: f64, index: usize) -> Result<f64> {
    if factor == 0.0 {
        return Err(DarwinError::ZeroLevel { index });
    }
    let step = factor.abs().ln();
    if !step.is_finite() {
        return Err(DarwinError::NonFinite { index });
    }
    Ok(step)
}

/// Simulates `x_0..x_n` of the positive auxiliary process from stream 0 of `seed`.
pub fn simulate_auxiliary(
    params: DarwinParams,
    spec: InnovationSpec,
    n: usize,
    x0: f64,
    seed: u64,
) -> Result<Path> {
    let mut rng = stream_rng(seed, 0);
    check_n(n)?;
    let mut eta = vec![0.0; n];
    spec.fill(&mut rng, &mut eta);
    let mut path = auxiliary_from_innovations(params, x0, &eta)?;
    path.meta.spec = Some(spec);
    path.meta.seed = Some(seed);
    Ok(path)
}

pub fn auxiliary_from_innovations(params: DarwinParams, x0: f64, eta: &[f64]) -> Result<Path> {
    check_n(eta.len())?;
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(DarwinError::InvalidArgument(format!(
            "auxiliary start must be finite and positive (got {x0})"
        )));
    }
    let scale = params.alpha.sqrt();
    let mut la = x0.ln();
    let mut logabs = Vec::with_capacity(eta.len() + 1);
    let mut steps = Vec::with_capacity(eta.len());
    logabs.push(la);
    for (i, &e) in eta.iter().enumerate() {
        let step = checked_log_factor(params.phi + e * scale, i + 1)?;
        la += step;
        logabs.push(la);
        steps.push(step);
    }
    Ok(Path {
        signs: vec![1; eta.len() + 1],
        logabs,
        steps,
        meta: PathMeta { kind: PathKind::Auxiliary, params: Some(params), spec: None, seed: None, y0: x0 },
    })
}

/// Simulates levels of the intercepted model. Intended for stationary
/// parameter sets; fails if a level overflows or hits zero.
pub fn simulate_dar(
    params: DarParams,
    spec: InnovationSpec,
    n: usize,
    y0: InitialValue,
    seed: u64,
) -> Result<Series> {
    check_n(n)?;
    let mut rng = stream_rng(seed, 0);
    let mut y = y0.resolve(&mut rng)?;
    let mut values = Vec::with_capacity(n + 1);
    values.push(y);
    for t in 1..=n {
        let e = spec.draw(&mut rng);
        y = params.phi * y + e * (params.omega + params.alpha * y * y).sqrt();
        if !y.is_finite() {
            return Err(DarwinError::Overflow { index: t });
        }
        values.push(y);
    }
    Series::new(values)
}
