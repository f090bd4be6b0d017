//! Bracketed root finding: secant steps kept inside the bracket, with a
//! bisection step whenever the bracket fails to halve.

use crate::error::{DarwinError, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once `|f(x)| < ftol`.
    pub ftol: f64,
    /// Stop once the bracket is narrower than this.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { ftol: 1e-6, xtol: 1e-12, max_iter: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, opts: &RootOptions) -> Result<Root> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(DarwinError::InvalidArgument("function is NaN at a bracket end".into()));
    }
    if fa.abs() < opts.ftol {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    if fb.abs() < opts.ftol {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(DarwinError::InvalidArgument(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut use_secant = true;
    for it in 1..=opts.max_iter {
        let secant = b - fb * (b - a) / (fb - fa);
        let x = if use_secant && secant > a && secant < b { secant } else { 0.5 * (a + b) };
        let old_width = b - a;
        let fx = f(x);
        if fx.is_nan() {
            return Err(DarwinError::InvalidArgument(format!("function is NaN at {x}")));
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() < opts.ftol {
            return Ok(Root { x, fx, iterations: it });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        use_secant = b - a <= 0.5 * old_width;
        if b - a < opts.xtol {
            return Ok(Root { x: best.0, fx: best.1, iterations: it });
        }
    }
    Ok(Root { x: best.0, fx: best.1, iterations: opts.max_iter })
}
