//! Energy conservation and phase matching for degenerately pumped FWM.
//!
//! Two pump photons at ω_p produce a signal at ω_s and an idler at
//! ω_i = 2ω_p − ω_s. The process is phase matched where
//! `Δβ = β(ω_s) + β(ω_i) + 2γP − 2β(ω_p)` vanishes.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionModel;
use crate::numeric::bisect;
use crate::units::{gamma_per_w_m, nm_from_omega, omega_from_nm, SPEED_OF_LIGHT};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwmParams {
    /// Nonlinear coefficient γ, 1/(W·km).
    pub gamma_per_w_km: f64,
    /// Peak pump power, W.
    pub peak_power_w: f64,
}

impl Default for FwmParams {
    fn default() -> Self {
        FwmParams { gamma_per_w_km: 20.0, peak_power_w: 0.0 }
    }
}

impl FwmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_per_w_km >= 0.0 && self.gamma_per_w_km.is_finite()) {
            return Err(Error::validation(format!("γ must be non-negative, got {}", self.gamma_per_w_km)));
        }
        if !(self.peak_power_w >= 0.0 && self.peak_power_w.is_finite()) {
            return Err(Error::validation(format!("peak power must be non-negative, got {}", self.peak_power_w)));
        }
        Ok(())
    }

    /// The nonlinear phase term 2γP in 1/m.
    pub fn nonlinear_term(&self) -> f64 {
        2.0 * gamma_per_w_m(self.gamma_per_w_km) * self.peak_power_w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMatchPoint {
    pub lambda_pump_nm: f64,
    pub lambda_signal_nm: f64,
    pub lambda_idler_nm: f64,
    /// Residual Δβ at the returned root, 1/m.
    pub delta_beta: f64,
    /// Width of the final root bracket, converted to signal wavelength (nm).
    pub bracket_nm: f64,
}

/// ω_i = 2ω_p − ω_s.
pub fn idler_frequency(omega_p: f64, omega_s: f64) -> Result<f64> {
    if !(omega_s > 0.0 && omega_p > 0.0) {
        return Err(Error::validation("frequencies must be positive"));
    }
    let omega_i = 2.0 * omega_p - omega_s;
    if !(omega_i > 0.0) {
        return Err(Error::validation(format!(
            "signal frequency {omega_s:e} leaves no positive idler for pump {omega_p:e}"
        )));
    }
    Ok(omega_i)
}

/// Total phase mismatch Δβ in 1/m.
pub fn mismatch(model: &DispersionModel, params: &FwmParams, omega_p: f64, omega_s: f64) -> Result<f64> {
    let omega_i = idler_frequency(omega_p, omega_s)?;
    let bp = model.beta(omega_p)?;
    let bs = model.beta(omega_s)?;
    let bi = model.beta(omega_i)?;
    Ok(bs + bi + params.nonlinear_term() - 2.0 * bp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Uniform scan points per contiguous search segment.
    pub scan_points: usize,
    /// Accept a root once |Δβ| falls below this, 1/m.
    pub tolerance: f64,
    /// Half-width of the band around the pump excluded from the search, nm.
    pub guard_band_nm: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { scan_points: 2000, tolerance: 1e-4, guard_band_nm: 5.0 }
    }
}

/// Phase-matched signal wavelengths for pump `lambda_p_nm` inside
/// `search_window_nm`, with default solver settings.
pub fn solve_signal(model: &DispersionModel, params: &FwmParams, lambda_p_nm: f64, search_window_nm: (f64, f64)) -> Result<Vec<PhaseMatchPoint>> {
    solve_signal_with(model, params, lambda_p_nm, search_window_nm, &SolverOptions::default())
}

pub fn solve_signal_with(
    model: &DispersionModel,
    params: &FwmParams,
    lambda_p_nm: f64,
    search_window_nm: (f64, f64),
    options: &SolverOptions,
) -> Result<Vec<PhaseMatchPoint>> {
    params.validate()?;
    let (lo_nm, hi_nm) = search_window_nm;
    if !(lo_nm > 0.0 && hi_nm > lo_nm) {
        return Err(Error::validation(format!("empty search window {search_window_nm:?} nm")));
    }
    if options.scan_points < 2 || !(options.tolerance > 0.0) || !(options.guard_band_nm >= 0.0) {
        return Err(Error::validation("invalid phase-matching solver options"));
    }
    if !model.allows_extrapolation() {
        let (wlo, whi) = model.window_nm();
        for l in [lo_nm, hi_nm, lambda_p_nm] {
            if !model.contains_nm(l) {
                return Err(Error::Domain { quantity: "wavelength (nm)", value: l, min: wlo, max: whi });
            }
        }
    }
    let omega_p = omega_from_nm(lambda_p_nm);

    // Signal frequencies whose idler also lies inside the model window.
    let (mut s_lo, mut s_hi) = (omega_from_nm(hi_nm), omega_from_nm(lo_nm));
    if !model.allows_extrapolation() {
        let (wlo, whi) = model.omega_window();
        // A relative margin keeps rounding from pushing the idler outside.
        let margin = 1e-12 * omega_p;
        s_lo = s_lo.max(2.0 * omega_p - whi + margin);
        s_hi = s_hi.min(2.0 * omega_p - wlo - margin);
    }
    s_hi = s_hi.min(2.0 * omega_p * (1.0 - 1e-12));

    let guard_lo = omega_from_nm(lambda_p_nm + options.guard_band_nm);
    let guard_hi = omega_from_nm(lambda_p_nm - options.guard_band_nm);
    let mut segments = Vec::with_capacity(2);
    if s_lo < guard_lo.min(s_hi) {
        segments.push((s_lo, guard_lo.min(s_hi)));
    }
    if guard_hi.max(s_lo) < s_hi {
        segments.push((guard_hi.max(s_lo), s_hi));
    }

    let f = |ws: f64| mismatch(model, params, omega_p, ws);
    let mut points = Vec::new();
    for (a, b) in segments {
        let n = options.scan_points;
        let step = (b - a) / (n - 1) as f64;
        let mut x0 = a;
        let mut f0 = f(x0)?;
        if f0 == 0.0 {
            points.push(make_point(lambda_p_nm, omega_p, x0, 0.0, 0.0));
        }
        for k in 1..n {
            let x1 = if k + 1 == n { b } else { a + k as f64 * step };
            let f1 = f(x1)?;
            if f1 == 0.0 {
                points.push(make_point(lambda_p_nm, omega_p, x1, 0.0, 0.0));
            } else if f0 != 0.0 && f0.signum() != f1.signum() {
                let r = bisect(f, x0, x1, options.tolerance, 0.0).map_err(|e| match e {
                    Error::Numeric { message, bracket } => Error::Numeric {
                        message: format!(
                            "pump {lambda_p_nm} nm, signal bracket [{:.6}, {:.6}] nm: {message}",
                            nm_from_omega(bracket.1),
                            nm_from_omega(bracket.0)
                        ),
                        bracket,
                    },
                    other => other,
                })?;
                points.push(make_point(lambda_p_nm, omega_p, r.root, r.value, r.width));
            }
            x0 = x1;
            f0 = f1;
        }
    }
    points.sort_by(|a, b| a.lambda_signal_nm.total_cmp(&b.lambda_signal_nm));
    Ok(points)
}

fn make_point(lambda_p_nm: f64, omega_p: f64, omega_s: f64, residual: f64, width: f64) -> PhaseMatchPoint {
    let lambda_s = nm_from_omega(omega_s);
    PhaseMatchPoint {
        lambda_pump_nm: lambda_p_nm,
        lambda_signal_nm: lambda_s,
        lambda_idler_nm: nm_from_omega(2.0 * omega_p - omega_s),
        delta_beta: residual,
        bracket_nm: width * lambda_s * lambda_s * 1e-9 / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT),
    }
}

/// Tunes the pump inside `pump_range_nm` until the phase-matched idler sits
/// at `target_idler_nm`. The sideband with the shortest signal wavelength in
/// `signal_window_nm` is followed; the idler must change sign relative to the
/// target across the pump range.
pub fn pump_for_idler(
    model: &DispersionModel,
    params: &FwmParams,
    target_idler_nm: f64,
    pump_range_nm: (f64, f64),
    signal_window_nm: (f64, f64),
) -> Result<PhaseMatchPoint> {
    let idler_at = |lp: f64| -> Result<PhaseMatchPoint> {
        solve_signal(model, params, lp, signal_window_nm)?.first().copied().ok_or_else(|| Error::Numeric {
            message: format!("no phase-matched sideband for pump {lp} nm"),
            bracket: pump_range_nm,
        })
    };
    let r = bisect(|lp| Ok(idler_at(lp)?.lambda_idler_nm - target_idler_nm), pump_range_nm.0, pump_range_nm.1, 0.0, 1e-9)?;
    idler_at(r.root)
}

/// One pump wavelength of a contour sweep. An empty `points` list with no
/// error is a gap: nothing phase matches in the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    pub lambda_pump_nm: f64,
    pub points: Vec<PhaseMatchPoint>,
    pub error: Option<String>,
}

/// Phase-matching contour over `n_points` pumps evenly spaced in
/// `pump_range_nm`. Rows are evaluated in parallel; output order and content
/// do not depend on scheduling.
pub fn contour(
    model: &DispersionModel,
    params: &FwmParams,
    pump_range_nm: (f64, f64),
    n_points: usize,
    search_window_nm: (f64, f64),
    options: &SolverOptions,
) -> Result<Vec<ContourRow>> {
    if n_points < 2 {
        return Err(Error::validation("contour needs at least two pump wavelengths"));
    }
    let (a, b) = pump_range_nm;
    if !(a > 0.0 && b > a) {
        return Err(Error::validation(format!("empty pump range {pump_range_nm:?} nm")));
    }
    let step = (b - a) / (n_points - 1) as f64;
    let rows = (0..n_points)
        .into_par_iter()
        .map(|k| {
            let lp = if k + 1 == n_points { b } else { a + k as f64 * step };
            match solve_signal_with(model, params, lp, search_window_nm, options) {
                Ok(points) => ContourRow { lambda_pump_nm: lp, points, error: None },
                Err(e) => ContourRow { lambda_pump_nm: lp, points: Vec::new(), error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(rows)
}

/// Writes `lambda_pump_nm,lambda_signal_nm,lambda_idler_nm,delta_beta_1_per_m`;
/// pumps without a solution appear once with empty fields.
pub fn write_contour_csv<W: Write>(rows: &[ContourRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda_pump_nm", "lambda_signal_nm", "lambda_idler_nm", "delta_beta_1_per_m"])?;
    for row in rows {
        if row.points.is_empty() {
            w.write_record([row.lambda_pump_nm.to_string(), String::new(), String::new(), String::new()])?;
        }
        for p in &row.points {
            w.write_record([
                p.lambda_pump_nm.to_string(),
                p.lambda_signal_nm.to_string(),
                p.lambda_idler_nm.to_string(),
                p.delta_beta.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(b2: f64) -> DispersionModel {
        DispersionModel::taylor("quad", 1064.0, vec![0.0, 0.0, b2], (600.0, 2000.0), 1064.0).unwrap()
    }

    #[test]
    fn degenerate_idler() {
        let w = omega_from_nm(1064.0);
        assert_eq!(idler_frequency(w, w).unwrap(), w);
        assert!(idler_frequency(w, 2.0 * w).is_err());
    }

    #[test]
    fn idler_wavelength_oracle() {
        let wi = idler_frequency(omega_from_nm(1064.0), omega_from_nm(830.0)).unwrap();
        let expect = 1.0 / (2.0 / 1064.0 - 1.0 / 830.0);
        assert!((nm_from_omega(wi) - expect).abs() < 1e-9);
        assert!((expect - 1481.5).abs() < 0.5);
    }

    #[test]
    fn degenerate_mismatch_is_nonlinear_term() {
        let m = quadratic(5e-27);
        let w = omega_from_nm(1064.0);
        assert_eq!(mismatch(&m, &FwmParams::default(), w, w).unwrap(), 0.0);
        let p = FwmParams { gamma_per_w_km: 20.0, peak_power_w: 3.0 };
        assert_eq!(mismatch(&m, &p, w, w).unwrap(), 2.0 * 0.02 * 3.0);
    }

    #[test]
    fn quadratic_beta_closed_form() {
        let b2 = 5e-27;
        let m = quadratic(b2);
        let wp = omega_from_nm(1064.0);
        for l in [800.0, 950.0, 1010.0] {
            let ws = omega_from_nm(l);
            let wi = 2.0 * wp - ws;
            let expect = 0.5 * b2 * (ws - wp).powi(2) + 0.5 * b2 * (wi - wp).powi(2);
            let got = mismatch(&m, &FwmParams::default(), wp, ws).unwrap();
            assert!(((got - expect) / expect).abs() < 1e-10);
        }
    }

    #[test]
    fn normal_quadratic_has_no_sidebands() {
        let rows = contour(&quadratic(5e-27), &FwmParams::default(), (1050.0, 1080.0), 7, (700.0, 1040.0), &SolverOptions::default()).unwrap();
        assert!(rows.iter().all(|r| r.points.is_empty() && r.error.is_none()));
        let mut buf = Vec::new();
        write_contour_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "1050,,,");
    }

    #[test]
    fn window_outside_model_is_domain_error() {
        let m = quadratic(5e-27);
        let r = solve_signal(&m, &FwmParams::default(), 1064.0, (500.0, 1000.0));
        assert!(matches!(r, Err(Error::Domain { .. })));
    }
}
