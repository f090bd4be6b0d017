//! Simulation, estimation and stability testing for the first-order double
//! autoregressive model without intercept,
//!
//! ```text
//! y_t = φ y_{t-1} + η_t sqrt(α y²_{t-1}),
//! ```
//!
//! whose log-volatility is a random walk with drift `γ₀ = E log|φ + η√α|`.
//! Paths are stored in log-sign form and every estimator works on the ratio
//! sequence `y_t / y_{t-1}`, so explosive and collapsing paths are handled at
//! any horizon.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod estimate;
pub mod innovations;
pub mod io;
pub mod montecarlo;
pub mod numeric;
pub mod process;
pub mod rng;
pub mod theory;

pub use error::{DarwinError, Result};
pub use innovations::InnovationSpec;
pub use process::{DarParams, DarwinParams, InitialValue, Observations, OverflowPolicy, Path, Series};
