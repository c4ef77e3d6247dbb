//! Small numerical kernels shared by the physics modules.

use std::sync::OnceLock;

use crate::{Error, Result};

/// Outcome of a bracketed bisection.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bisection {
    pub root: f64,
    pub value: f64,
    /// Width of the final bracket.
    pub width: f64,
}

/// Bisects `f` on `[a, b]` until `|f(mid)| < ftol`. With `ftol <= 0` the
/// bracket is shrunk to `xtol` (or to adjacent floats) and that is success;
/// otherwise a collapsed bracket with a large residual is an error.
/// `f(a)` and `f(b)` must have opposite signs.
pub(crate) fn bisect<F>(mut f: F, a: f64, b: f64, ftol: f64, xtol: f64) -> Result<Bisection>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(Bisection { root: lo, value: 0.0, width: 0.0 });
    }
    if fhi == 0.0 {
        return Ok(Bisection { root: hi, value: 0.0, width: 0.0 });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numeric {
            message: "no sign change in bracket".into(),
            bracket: (a, b),
        });
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        let width = (hi - lo).abs();
        if fm.abs() < ftol {
            return Ok(Bisection { root: mid, value: fm, width });
        }
        if width <= xtol || mid == lo || mid == hi {
            if ftol <= 0.0 {
                return Ok(Bisection { root: mid, value: fm, width });
            }
            return Err(Error::Numeric {
                message: format!("bracket collapsed with residual {fm:e} above tolerance {ftol:e}"),
                bracket: (lo, hi),
            });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric {
        message: "bisection did not converge".into(),
        bracket: (lo, hi),
    })
}

const GAUSS_ORDER: usize = 24;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GAUSS_ORDER))
}

fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// ∫ₐᵇ f(u) du by 24-point Gauss–Legendre.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for &(x, w) in gauss_legendre() {
        acc += w * f(mid + half * x);
    }
    acc * half
}
