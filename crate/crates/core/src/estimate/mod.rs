//! Inference on observed or simulated data. Every estimator reads the ratio
//! sequence `y_t / y_{t-1}` (or its log magnitude), never raw levels, except
//! the intercepted comparison model which needs levels by construction.

mod acf;
mod dar;
mod qmle;
mod simplex;
mod stability;
mod wald;

pub use acf::{residual_acf, AcfResult};
pub use dar::{dar_loglik, dar_qmle_fit, DarFit, DarFitOptions};
pub use qmle::{log_volatility, plugin_lyapunov, qmle_fit, PluginEstimate, QmleFit};
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};
pub use stability::{lyapunov_estimate, lyapunov_estimate_from_logs, telescoped_gamma, StabilityReport};
pub use wald::{wald_test, WaldReport};

/// Relative floor below which a sample variance is treated as exactly zero.
pub(crate) const DEGENERATE_REL: f64 = 1e-24;
