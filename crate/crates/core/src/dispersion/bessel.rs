//! Bessel functions needed by the LP01 eigenvalue equation.
//!
//! J₀ and J₁ are only ever evaluated on the core side, where the LP01
//! argument stays below the first zero of J₀ (≈ 2.405), so the power series
//! is used directly. K₀ and K₁ are returned exponentially scaled,
//! `e^x·Kₙ(x)`, and evaluated from the integral representation
//! `Kₙ(x) = ∫₀^∞ exp(−x·cosh t)·cosh(n t) dt` with the trapezoidal rule, which
//! converges geometrically for this analytic integrand.

/// Largest argument for which the J series is used without loss of accuracy.
pub(crate) const J_SERIES_LIMIT: f64 = 8.0;

fn j_series(n: u32, x: f64) -> f64 {
    debug_assert!(x.abs() <= J_SERIES_LIMIT);
    let q = -0.25 * x * x;
    let mut term = (0.5 * x).powi(n as i32);
    for k in 1..=n {
        term /= k as f64;
    }
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

pub(crate) fn j0(x: f64) -> f64 {
    j_series(0, x)
}

pub(crate) fn j1(x: f64) -> f64 {
    j_series(1, x)
}

/// (e^x·K₀(x), e^x·K₁(x)) for x > 0.
pub(crate) fn k01_scaled(x: f64) -> (f64, f64) {
    debug_assert!(x > 0.0);
    // f(t) = exp(−x(cosh t − 1)); stop once the integrand is negligible
    // against the accumulated sums.
    // The integrand is analytic in |Im t| < π/2 and, for large x, close to a
    // Gaussian of width 1/√x; both limits need h well below those scales.
    let h = (0.5 / x.sqrt()).min(0.1);
    let mut k0 = 0.5;
    let mut k1 = 0.5;
    let mut t = h;
    loop {
        let c = t.cosh();
        let s = (0.5 * t).sinh();
        let f = (-2.0 * x * s * s).exp();
        k0 += f;
        k1 += f * c;
        if f * c < 1e-18 * k1 {
            break;
        }
        t += h;
    }
    (h * k0, h * k1)
}
