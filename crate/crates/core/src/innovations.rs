//! The three symmetric, unit-variance innovation laws.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::distr::Open01;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::DarwinError;
use crate::rng::stream_rng;

/// Innovation distribution of the model noise. All three have mean 0,
/// variance 1 and a density symmetric about 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InnovationSpec {
    #[serde(rename = "gaussian")]
    Gaussian,
    /// Student t with 5 degrees of freedom scaled by `sqrt(3/5)`.
    #[serde(rename = "t5std")]
    StudentT5Std,
    /// Laplace with scale `1/sqrt(2)`.
    #[serde(rename = "laplace")]
    LaplaceStd,
}

const T5_SCALE: f64 = 0.774_596_669_241_483_4; // sqrt(3/5)
const LAPLACE_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl InnovationSpec {
    pub const ALL: [InnovationSpec; 3] = [
        InnovationSpec::Gaussian,
        InnovationSpec::StudentT5Std,
        InnovationSpec::LaplaceStd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InnovationSpec::Gaussian => "gaussian",
            InnovationSpec::StudentT5Std => "t5std",
            InnovationSpec::LaplaceStd => "laplace",
        }
    }

    /// Fourth moment `E η⁴`.
    pub fn kurtosis(self) -> f64 {
        match self {
            InnovationSpec::Gaussian => 3.0,
            InnovationSpec::StudentT5Std => 9.0,
            InnovationSpec::LaplaceStd => 6.0,
        }
    }

    pub fn density(self, x: f64) -> f64 {
        match self {
            InnovationSpec::Gaussian => (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
            InnovationSpec::StudentT5Std => {
                let u = 1.0 + x * x / 3.0;
                8.0 / (3.0 * PI * 3f64.sqrt()) / (u * u * u)
            }
            InnovationSpec::LaplaceStd => (-SQRT_2 * x.abs()).exp() / SQRT_2,
        }
    }

    /// One draw. Gaussian uses the ziggurat normal, t₅ the normal over
    /// root-chi-square ratio, Laplace the inverse CDF on an open uniform.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            InnovationSpec::Gaussian => rng.sample(StandardNormal),
            InnovationSpec::StudentT5Std => {
                let z: f64 = rng.sample(StandardNormal);
                let chi2: f64 = ChiSquared::new(5.0).expect("valid dof").sample(rng);
                z / (chi2 / 5.0).sqrt() * T5_SCALE
            }
            InnovationSpec::LaplaceStd => {
                let u: f64 = rng.sample(Open01);
                let v = u - 0.5;
                -LAPLACE_SCALE * v.signum() * (1.0 - 2.0 * v.abs()).ln()
            }
        }
    }

    /// Fills `out` with i.i.d. draws.
    pub fn fill<R: Rng + ?Sized>(self, rng: &mut R, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.draw(rng);
        }
    }
}

/// `n` i.i.d. draws from stream 0 of `seed`.
pub fn sample(spec: InnovationSpec, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 0);
    let mut out = vec![0.0; n];
    spec.fill(&mut rng, &mut out);
    out
}

impl fmt::Display for InnovationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InnovationSpec {
    type Err = DarwinError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(InnovationSpec::Gaussian),
            "t5std" => Ok(InnovationSpec::StudentT5Std),
            "laplace" => Ok(InnovationSpec::LaplaceStd),
            other => Err(DarwinError::InvalidArgument(format!(
                "unknown innovation kind '{other}' (expected gaussian, t5std or laplace)"
            ))),
        }
    }
}
