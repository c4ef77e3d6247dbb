//! Gauge-fixed propagation constant β(ω) of the fundamental mode.

use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::fit::{fit_gvd_polynomial, GvdFit, GvdPolynomial, GvdSample, GvdSamples};
use super::lp01::StepIndexProxy;
use super::material::MATERIAL_DOMAIN_UM;
use crate::numeric::integrate;
use crate::units::{beta2_from_d, d_from_beta2, nm_from_omega, omega_from_nm, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// Default gauge reference: the 1064 nm pump.
pub const DEFAULT_REFERENCE_NM: f64 = 1064.0;

/// Relative frequency step of the finite-difference stencils used on the
/// step-index proxy.
const FD_STEP: f64 = 1e-3;

/// Wavelength range of the design surrogate fit, nm.
pub const DESIGN_RANGE_NM: (f64, f64) = (700.0, 1700.0);

/// How β(ω) is represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representation {
    /// Polynomial D(λ), usually fitted to measured GVD; β follows from double
    /// integration of β₂.
    Polynomial { gvd: GvdPolynomial },
    /// n_eff(λ) from the step-index LP01 proxy.
    StepIndex { proxy: StepIndexProxy },
    /// Taylor series Σ β_k (ω − ω₀)^k / k!, `betas[k]` in s^k/m. The β₀ and
    /// β₁ entries are accepted but never enter any output.
    Taylor { center_nm: f64, betas: Vec<f64> },
}

impl Representation {
    pub fn kind(&self) -> &'static str {
        match self {
            Representation::Polynomial { .. } => "polynomial",
            Representation::StepIndex { .. } => "step_index",
            Representation::Taylor { .. } => "taylor",
        }
    }
}

/// Fit metadata kept alongside a polynomial model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub degree: usize,
    pub residuals: Vec<f64>,
    pub rms_residual: f64,
}

/// β(ω) with the gauge β(ω_ref) = β′(ω_ref) = 0 and a validity window.
///
/// Construction validates the inputs; the value is immutable afterwards.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DispersionModel {
    id: String,
    reference_nm: f64,
    /// Validity window in nm, inclusive.
    window_nm: (f64, f64),
    #[serde(default)]
    allow_extrapolation: bool,
    representation: Representation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fit: Option<FitReport>,
    /// (β(ω_ref), β′(ω_ref)) of the raw step-index β.
    #[serde(skip)]
    gauge: OnceLock<(f64, f64)>,
}

impl PartialEq for DispersionModel {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.reference_nm == other.reference_nm
            && self.window_nm == other.window_nm
            && self.allow_extrapolation == other.allow_extrapolation
            && self.representation == other.representation
            && self.fit == other.fit
    }
}

fn check_window(window_nm: (f64, f64)) -> Result<()> {
    if !(window_nm.0 > 0.0 && window_nm.1 > window_nm.0 && window_nm.1.is_finite()) {
        return Err(Error::validation(format!("invalid model window {window_nm:?} nm")));
    }
    Ok(())
}

impl DispersionModel {
    fn build(id: String, reference_nm: f64, window_nm: (f64, f64), representation: Representation, fit: Option<FitReport>) -> Result<Self> {
        check_window(window_nm)?;
        if !(reference_nm > 0.0 && reference_nm.is_finite()) {
            return Err(Error::validation("gauge reference wavelength must be positive"));
        }
        let model = DispersionModel {
            id,
            reference_nm,
            window_nm,
            allow_extrapolation: false,
            representation,
            fit,
            gauge: OnceLock::new(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Re-checks a model, e.g. after deserialisation.
    pub fn validate(&self) -> Result<()> {
        check_window(self.window_nm)?;
        match &self.representation {
            Representation::Polynomial { gvd } => {
                if gvd.coefficients.is_empty() || !(gvd.half_span_nm > 0.0) {
                    return Err(Error::validation("empty or degenerate D polynomial"));
                }
            }
            Representation::StepIndex { proxy } => {
                proxy.validate()?;
                let lo = MATERIAL_DOMAIN_UM.0 * 1e3 * (1.0 + 2.0 * FD_STEP);
                let hi = MATERIAL_DOMAIN_UM.1 * 1e3 * (1.0 - 2.0 * FD_STEP);
                if self.window_nm.0 < lo || self.window_nm.1 > hi {
                    return Err(Error::validation(format!(
                        "step-index window must lie within [{lo:.1}, {hi:.1}] nm"
                    )));
                }
            }
            Representation::Taylor { center_nm, betas } => {
                if !(*center_nm > 0.0) || betas.iter().any(|b| !b.is_finite()) {
                    return Err(Error::validation("invalid Taylor expansion"));
                }
            }
        }
        Ok(())
    }

    /// Model from a fitted D polynomial; the validity window is the fit domain.
    pub fn from_fit(id: impl Into<String>, fit: GvdFit, reference_nm: f64) -> Result<Self> {
        let report = FitReport {
            degree: fit.polynomial.degree(),
            residuals: fit.residuals,
            rms_residual: fit.rms_residual,
        };
        Self::build(id.into(), reference_nm, fit.domain_nm, Representation::Polynomial { gvd: fit.polynomial }, Some(report))
    }

    pub fn step_index(id: impl Into<String>, proxy: StepIndexProxy, window_nm: (f64, f64), reference_nm: f64) -> Result<Self> {
        Self::build(id.into(), reference_nm, window_nm, Representation::StepIndex { proxy }, None)
    }

    pub fn taylor(id: impl Into<String>, center_nm: f64, betas: Vec<f64>, window_nm: (f64, f64), reference_nm: f64) -> Result<Self> {
        Self::build(id.into(), reference_nm, window_nm, Representation::Taylor { center_nm, betas }, None)
    }

    /// Allows evaluation outside the validity window.
    pub fn with_extrapolation(mut self, allow: bool) -> Self {
        self.allow_extrapolation = allow;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn reference_nm(&self) -> f64 {
        self.reference_nm
    }

    pub fn window_nm(&self) -> (f64, f64) {
        self.window_nm
    }

    pub fn allows_extrapolation(&self) -> bool {
        self.allow_extrapolation
    }

    pub fn representation(&self) -> &Representation {
        &self.representation
    }

    pub fn fit_report(&self) -> Option<&FitReport> {
        self.fit.as_ref()
    }

    pub fn omega_ref(&self) -> f64 {
        omega_from_nm(self.reference_nm)
    }

    /// Angular-frequency window (low, high).
    pub fn omega_window(&self) -> (f64, f64) {
        (omega_from_nm(self.window_nm.1), omega_from_nm(self.window_nm.0))
    }

    pub fn contains_nm(&self, wavelength_nm: f64) -> bool {
        wavelength_nm >= self.window_nm.0 && wavelength_nm <= self.window_nm.1
    }

    fn check_omega(&self, omega: f64) -> Result<()> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::validation(format!("angular frequency must be positive, got {omega}")));
        }
        if self.allow_extrapolation {
            return Ok(());
        }
        let (lo, hi) = self.omega_window();
        if omega < lo || omega > hi {
            return Err(Error::Domain {
                quantity: "wavelength (nm)",
                value: nm_from_omega(omega),
                min: self.window_nm.0,
                max: self.window_nm.1,
            });
        }
        Ok(())
    }

    /// Gauge-fixed propagation constant, 1/m.
    pub fn beta(&self, omega: f64) -> Result<f64> {
        self.check_omega(omega)?;
        let wr = self.omega_ref();
        match &self.representation {
            Representation::Polynomial { gvd } => Ok(integrate(|u| (omega - u) * poly_beta2(gvd, u), wr, omega)),
            Representation::StepIndex { proxy } => {
                let (b0, b1) = self.step_index_gauge(proxy)?;
                Ok(raw_beta(proxy, omega)? - b0 - b1 * (omega - wr))
            }
            Representation::Taylor { center_nm, betas } => {
                let w0 = omega_from_nm(*center_nm);
                let x = omega - w0;
                let xr = wr - w0;
                Ok(taylor_tail(betas, x, 0) - taylor_tail(betas, xr, 0) - taylor_tail(betas, xr, 1) * (omega - wr))
            }
        }
    }

    /// Gauge-fixed dβ/dω, s/m.
    pub fn beta1(&self, omega: f64) -> Result<f64> {
        self.check_omega(omega)?;
        let wr = self.omega_ref();
        match &self.representation {
            Representation::Polynomial { gvd } => Ok(integrate(|u| poly_beta2(gvd, u), wr, omega)),
            Representation::StepIndex { proxy } => {
                let (_, b1) = self.step_index_gauge(proxy)?;
                Ok(raw_beta1(proxy, omega)? - b1)
            }
            Representation::Taylor { center_nm, betas } => {
                let w0 = omega_from_nm(*center_nm);
                Ok(taylor_tail(betas, omega - w0, 1) - taylor_tail(betas, wr - w0, 1))
            }
        }
    }

    /// Group-velocity dispersion β₂ = d²β/dω², s²/m.
    pub fn beta2(&self, omega: f64) -> Result<f64> {
        self.check_omega(omega)?;
        match &self.representation {
            Representation::Polynomial { gvd } => Ok(poly_beta2(gvd, omega)),
            Representation::StepIndex { proxy } => raw_beta2(proxy, omega),
            Representation::Taylor { center_nm, betas } => Ok(taylor_tail(betas, omega - omega_from_nm(*center_nm), 2)),
        }
    }

    /// Dispersion parameter D at `wavelength_nm`, ps/(nm·km).
    pub fn d_param(&self, wavelength_nm: f64) -> Result<f64> {
        let omega = omega_from_nm(wavelength_nm);
        if let Representation::Polynomial { gvd } = &self.representation {
            self.check_omega(omega)?;
            return Ok(gvd.eval(wavelength_nm));
        }
        Ok(d_from_beta2(self.beta2(omega)?, wavelength_nm))
    }

    /// D sampled at `points` evenly spaced wavelengths across `[lo, hi]` nm.
    pub fn sample_d(&self, lo_nm: f64, hi_nm: f64, points: usize) -> Result<GvdSamples> {
        if points < 2 {
            return Err(Error::validation("need at least two sample points"));
        }
        let step = (hi_nm - lo_nm) / (points - 1) as f64;
        let samples = (0..points)
            .map(|k| {
                let l = if k + 1 == points { hi_nm } else { lo_nm + k as f64 * step };
                Ok(GvdSample { wavelength_nm: l, d: self.d_param(l)?, sigma: None })
            })
            .collect::<Result<Vec<_>>>()?;
        GvdSamples::new(samples)
    }

    /// Polynomial model obtained by sampling D from this model and fitting.
    /// Used to replace the slow step-index evaluation by a fast surrogate.
    pub fn to_polynomial(&self, id: impl Into<String>, lo_nm: f64, hi_nm: f64, points: usize, degree: usize) -> Result<Self> {
        let fit = fit_gvd_polynomial(&self.sample_d(lo_nm, hi_nm, points)?, degree)?;
        Self::from_fit(id, fit, self.reference_nm)
    }

    /// Fast polynomial surrogate of a step-index proxy: D sampled at 201
    /// points over 700–1700 nm and fitted with degree 14, which keeps β₂
    /// within 10⁻⁷ of its largest magnitude on that range.
    pub fn design_surrogate(id: impl Into<String>, proxy: StepIndexProxy) -> Result<Self> {
        let exact = Self::step_index("step-index-proxy", proxy, DESIGN_RANGE_NM, DEFAULT_REFERENCE_NM)?;
        exact.to_polynomial(id, DESIGN_RANGE_NM.0, DESIGN_RANGE_NM.1, 201, 14)
    }

    fn step_index_gauge(&self, proxy: &StepIndexProxy) -> Result<(f64, f64)> {
        if let Some(g) = self.gauge.get() {
            return Ok(*g);
        }
        let wr = self.omega_ref();
        let g = (raw_beta(proxy, wr)?, raw_beta1(proxy, wr)?);
        Ok(*self.gauge.get_or_init(|| g))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: DispersionModel = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Fits `samples` with a polynomial of `degree` and gauges β at the default
/// 1064 nm reference.
pub fn fit_gvd(samples: &GvdSamples, degree: usize) -> Result<DispersionModel> {
    DispersionModel::from_fit("gvd-fit", fit_gvd_polynomial(samples, degree)?, DEFAULT_REFERENCE_NM)
}

#[inline]
fn poly_beta2(gvd: &GvdPolynomial, omega: f64) -> f64 {
    let l = nm_from_omega(omega);
    beta2_from_d(gvd.eval(l), l)
}

/// d^m/dx^m of Σ_{k≥2} β_k x^k / k!.
fn taylor_tail(betas: &[f64], x: f64, m: usize) -> f64 {
    let mut acc = 0.0;
    for k in (m.max(2)..betas.len()).rev() {
        let mut term = betas[k];
        // x^(k-m)/(k-m)!
        let p = k - m;
        let mut f = 1.0;
        for j in 1..=p {
            f *= x / j as f64;
        }
        term *= f;
        acc += term;
    }
    acc
}

fn raw_beta(proxy: &StepIndexProxy, omega: f64) -> Result<f64> {
    let lambda_um = nm_from_omega(omega) * 1e-3;
    Ok(proxy.effective_index(lambda_um)? * omega / SPEED_OF_LIGHT)
}

fn raw_beta1(proxy: &StepIndexProxy, omega: f64) -> Result<f64> {
    let h = FD_STEP * omega;
    let f = |k: f64| raw_beta(proxy, omega + k * h);
    Ok((-f(2.0)? + 8.0 * f(1.0)? - 8.0 * f(-1.0)? + f(-2.0)?) / (12.0 * h))
}

fn raw_beta2(proxy: &StepIndexProxy, omega: f64) -> Result<f64> {
    let h = FD_STEP * omega;
    let f = |k: f64| raw_beta(proxy, omega + k * h);
    Ok((-f(2.0)? + 16.0 * f(1.0)? - 30.0 * f(0.0)? + 16.0 * f(-1.0)? - f(-2.0)?) / (12.0 * h * h))
}
