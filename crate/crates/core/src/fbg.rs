//! Uniform fibre Bragg gratings: coupled-mode closed form, transfer-matrix
//! propagation, inverse design from stop-band targets and use as a filter.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::bisect;
use crate::spectral::{fwhm, SpectralGrid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingSpec {
    pub length_mm: f64,
    pub period_nm: f64,
    pub n_eff: f64,
    /// Amplitude of the induced index modulation.
    pub delta_n: f64,
    /// Fringe visibility in [0, 1].
    pub visibility: f64,
}

impl GratingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_mm > 0.0 && self.length_mm.is_finite()) {
            return Err(Error::validation(format!("grating length must be positive, got {} mm", self.length_mm)));
        }
        if !(self.period_nm > 0.0 && self.period_nm.is_finite()) {
            return Err(Error::validation("grating period must be positive"));
        }
        if !(self.n_eff > 1.0 && self.n_eff.is_finite()) {
            return Err(Error::validation(format!("effective index must exceed 1, got {}", self.n_eff)));
        }
        if !(self.delta_n >= 0.0 && self.delta_n.is_finite()) {
            return Err(Error::validation("index modulation must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::validation(format!("fringe visibility {} outside [0, 1]", self.visibility)));
        }
        Ok(())
    }

    /// λ_B = 2·n_eff·Λ, nm.
    pub fn bragg_nm(&self) -> f64 {
        2.0 * self.n_eff * self.period_nm
    }

    /// Coupling coefficient κ = π·v·δn/λ_B, 1/m.
    pub fn kappa_per_m(&self) -> f64 {
        std::f64::consts::PI * self.visibility * self.delta_n / (self.bragg_nm() * 1e-9)
    }

    pub fn kappa_length(&self) -> f64 {
        self.kappa_per_m() * self.length_mm * 1e-3
    }

    /// Detuning δ = 2π·n_eff·(1/λ − 1/λ_B), 1/m.
    pub fn detuning_per_m(&self, wavelength_nm: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.n_eff * (1.0 / wavelength_nm - 1.0 / self.bragg_nm()) * 1e9
    }

    /// Wavelength at which the detuning equals `delta` (1/m).
    pub fn wavelength_at_detuning(&self, delta: f64) -> f64 {
        1.0 / (1.0 / self.bragg_nm() + delta * 1e-9 / (2.0 * std::f64::consts::PI * self.n_eff))
    }
}

/// (sinh(sL)/s, cosh(sL)) with s² = κ² − δ², continued to the oscillatory
/// branch when |δ| > κ.
fn uniform_terms(kappa: f64, delta: f64, length_m: f64) -> (f64, f64) {
    let s2 = kappa * kappa - delta * delta;
    if s2 > 0.0 {
        let s = s2.sqrt();
        ((s * length_m).sinh() / s, (s * length_m).cosh())
    } else if s2 < 0.0 {
        let q = (-s2).sqrt();
        ((q * length_m).sin() / q, (q * length_m).cos())
    } else {
        (length_m, 1.0)
    }
}

/// Closed-form (R, T) of a uniform grating from κ, δ and length.
fn uniform_rt(kappa: f64, delta: f64, length_m: f64) -> (f64, f64) {
    let (sh, _) = uniform_terms(kappa, delta, length_m);
    // |F11|² = 1 + κ²·sh² for a unimodular lossless section.
    let x = kappa * kappa * sh * sh;
    if x == 0.0 {
        return (0.0, 1.0);
    }
    if !x.is_finite() {
        return (1.0, 0.0);
    }
    (1.0 / (1.0 + 1.0 / x), 1.0 / (1.0 + x))
}

/// Reflectance and transmittance of a uniform grating at `wavelength_nm`.
pub fn reflectance_analytic(spec: &GratingSpec, wavelength_nm: f64) -> Result<(f64, f64)> {
    spec.validate()?;
    if !(wavelength_nm > 0.0) {
        return Err(Error::validation("wavelength must be positive"));
    }
    Ok(uniform_rt(spec.kappa_per_m(), spec.detuning_per_m(wavelength_nm), spec.length_mm * 1e-3))
}

/// One piece of a piecewise-uniform grating sharing the period and n_eff of
/// its neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingSegment {
    pub length_mm: f64,
    pub delta_n: f64,
    pub visibility: f64,
}

type Matrix2 = [[Complex64; 2]; 2];

fn section_matrix(kappa: f64, delta: f64, length_m: f64) -> Matrix2 {
    let (sh, ch) = uniform_terms(kappa, delta, length_m);
    let i = Complex64::i();
    [
        [Complex64::new(ch, -delta * sh), -i * kappa * sh],
        [i * kappa * sh, Complex64::new(ch, delta * sh)],
    ]
}

fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// (R, T) of a segment chain at one wavelength. The running product is
/// renormalised whenever it grows large; the scale is tracked in log form.
fn chain_rt(period_nm: f64, n_eff: f64, segments: &[GratingSegment], wavelength_nm: f64) -> Result<(f64, f64)> {
    let bragg_nm = 2.0 * n_eff * period_nm;
    let delta = 2.0 * std::f64::consts::PI * n_eff * (1.0 / wavelength_nm - 1.0 / bragg_nm) * 1e9;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m: Matrix2 = [[one, zero], [zero, one]];
    let mut log_scale = 0.0;
    for seg in segments {
        let kappa = std::f64::consts::PI * seg.visibility * seg.delta_n / (bragg_nm * 1e-9);
        m = mat_mul(&section_matrix(kappa, delta, seg.length_mm * 1e-3), &m);
        let norm = m.iter().flatten().fold(0.0f64, |acc, z| acc.max(z.norm()));
        if norm > 1e100 {
            for z in m.iter_mut().flatten() {
                *z /= norm;
            }
            log_scale += norm.ln();
        }
    }
    let f11 = m[0][0].norm();
    if !(f11 > 0.0 && f11.is_finite()) {
        return Err(Error::Numeric {
            message: format!("transfer matrix degenerate at {wavelength_nm} nm"),
            bracket: (wavelength_nm, wavelength_nm),
        });
    }
    let r = (m[1][0].norm() / f11).powi(2);
    let t = (-2.0 * (f11.ln() + log_scale)).exp();
    Ok((r, t))
}

/// Which port of the grating a filter represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterArm {
    Reflection,
    Transmission,
}

/// Sampled spectral response of a grating (or any two-port filter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFilter {
    pub wavelength_nm: Vec<f64>,
    pub reflectance: Vec<f64>,
    pub transmittance: Vec<f64>,
    pub arm: FilterArm,
    /// Out-of-band floor b: the response is `X + b·(1 − X)` for the selected
    /// arm X.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
}

impl SpectralFilter {
    pub fn new(wavelength_nm: Vec<f64>, reflectance: Vec<f64>, transmittance: Vec<f64>, arm: FilterArm) -> Result<Self> {
        let f = SpectralFilter { wavelength_nm, reflectance, transmittance, arm, floor: None };
        f.validate()?;
        Ok(f)
    }

    /// Unit transmission everywhere on the grid.
    pub fn all_pass(grid: &SpectralGrid) -> Self {
        SpectralFilter {
            wavelength_nm: grid.wavelengths(),
            reflectance: vec![0.0; grid.points],
            transmittance: vec![1.0; grid.points],
            arm: FilterArm::Transmission,
            floor: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.wavelength_nm.len();
        if n < 2 || self.reflectance.len() != n || self.transmittance.len() != n {
            return Err(Error::validation("filter arrays must share a length of at least two"));
        }
        if self.wavelength_nm.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("filter wavelengths must be strictly increasing"));
        }
        for (k, (&r, &t)) in self.reflectance.iter().zip(&self.transmittance).enumerate() {
            if !(0.0..=1.0).contains(&r) || !(0.0..=1.0).contains(&t) || r + t > 1.0 + 1e-12 {
                return Err(Error::validation(format!("filter sample {k}: R = {r}, T = {t} not physical")));
            }
        }
        if let Some(b) = self.floor {
            if !(0.0..=1.0).contains(&b) {
                return Err(Error::validation("filter floor must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Filter response at sample `k`.
    pub fn response(&self, k: usize) -> f64 {
        let x = match self.arm {
            FilterArm::Reflection => self.reflectance[k],
            FilterArm::Transmission => self.transmittance[k],
        };
        match self.floor {
            Some(b) => x + b * (1.0 - x),
            None => x,
        }
    }

    pub fn responses(&self) -> Vec<f64> {
        (0..self.wavelength_nm.len()).map(|k| self.response(k)).collect()
    }

    /// Response at an arbitrary wavelength by linear interpolation; exact at
    /// the samples. Outside the sampled range is an error.
    pub fn response_at(&self, wavelength_nm: f64) -> Result<f64> {
        let w = &self.wavelength_nm;
        let (lo, hi) = (w[0], w[w.len() - 1]);
        if !(wavelength_nm >= lo && wavelength_nm <= hi) {
            return Err(Error::Domain { quantity: "filter wavelength (nm)", value: wavelength_nm, min: lo, max: hi });
        }
        let k = w.partition_point(|&x| x <= wavelength_nm);
        if k == 0 {
            return Ok(self.response(0));
        }
        let a = k - 1;
        if w[a] == wavelength_nm || a + 1 == w.len() {
            return Ok(self.response(a));
        }
        let f = (wavelength_nm - w[a]) / (w[a + 1] - w[a]);
        Ok(self.response(a) + f * (self.response(a + 1) - self.response(a)))
    }

    /// FWHM of the filter response, nm.
    pub fn fwhm_nm(&self) -> Result<f64> {
        fwhm(&self.wavelength_nm, &self.responses())
    }

    /// Writes `wavelength_nm,R,T,T_db`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["wavelength_nm", "R", "T", "T_db"])?;
        for k in 0..self.wavelength_nm.len() {
            let t = self.transmittance[k];
            w.write_record([
                self.wavelength_nm[k].to_string(),
                self.reflectance[k].to_string(),
                t.to_string(),
                (10.0 * t.log10()).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_grid(grid: &SpectralGrid) -> Result<()> {
    grid.validate()
}

/// Closed-form spectrum over a grid, reflection arm.
pub fn spectrum_analytic(spec: &GratingSpec, grid: &SpectralGrid) -> Result<SpectralFilter> {
    spec.validate()?;
    check_grid(grid)?;
    let (r, t): (Vec<f64>, Vec<f64>) = grid
        .wavelengths()
        .par_iter()
        .map(|&l| uniform_rt(spec.kappa_per_m(), spec.detuning_per_m(l), spec.length_mm * 1e-3))
        .unzip();
    Ok(SpectralFilter { wavelength_nm: grid.wavelengths(), reflectance: r, transmittance: t, arm: FilterArm::Reflection, floor: None })
}

/// Transfer-matrix spectrum of a uniform grating cut into `n_sections` equal
/// sections.
pub fn reflectance_tmm(spec: &GratingSpec, grid: &SpectralGrid, n_sections: usize) -> Result<SpectralFilter> {
    spec.validate()?;
    if n_sections == 0 {
        return Err(Error::validation("need at least one transfer-matrix section"));
    }
    let seg = GratingSegment { length_mm: spec.length_mm / n_sections as f64, delta_n: spec.delta_n, visibility: spec.visibility };
    reflectance_tmm_segments(spec.period_nm, spec.n_eff, &vec![seg; n_sections], grid)
}

/// Transfer-matrix spectrum of a piecewise-uniform grating.
pub fn reflectance_tmm_segments(period_nm: f64, n_eff: f64, segments: &[GratingSegment], grid: &SpectralGrid) -> Result<SpectralFilter> {
    check_grid(grid)?;
    if segments.is_empty() {
        return Err(Error::validation("need at least one grating segment"));
    }
    for s in segments {
        GratingSpec { length_mm: s.length_mm, period_nm, n_eff, delta_n: s.delta_n, visibility: s.visibility }.validate()?;
    }
    let values = grid
        .wavelengths()
        .par_iter()
        .map(|&l| chain_rt(period_nm, n_eff, segments, l))
        .collect::<Result<Vec<_>>>()?;
    let (r, t) = values.into_iter().unzip();
    Ok(SpectralFilter { wavelength_nm: grid.wavelengths(), reflectance: r, transmittance: t, arm: FilterArm::Reflection, floor: None })
}

/// Transmission dip at line centre in dB: 20·log₁₀(cosh κL).
pub fn transmission_contrast_db(kappa_length: f64) -> f64 {
    // ln cosh x without overflow for large x
    let x = kappa_length.abs();
    let ln_cosh = x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2;
    20.0 * ln_cosh / std::f64::consts::LN_10
}

/// κL giving a line-centre transmission dip of `contrast_db`.
pub fn kappa_length_for_contrast(contrast_db: f64) -> f64 {
    (10f64.powf(contrast_db / 20.0)).acosh()
}

/// Exact reflection-peak FWHM (nm) of a uniform grating: the half-maximum
/// detuning of the main lobe is found by bisection on the closed form.
pub fn reflection_fwhm_nm(spec: &GratingSpec) -> Result<f64> {
    spec.validate()?;
    let kappa = spec.kappa_per_m();
    let length = spec.length_mm * 1e-3;
    if kappa == 0.0 {
        return Err(Error::EmptySpectrum("grating without index modulation has no reflection peak".into()));
    }
    let (r0, _) = uniform_rt(kappa, 0.0, length);
    let half = 0.5 * r0;
    // The main lobe ends at the first zero, δ₁ = √(κ² + (π/L)²).
    let first_zero = (kappa * kappa + (std::f64::consts::PI / length).powi(2)).sqrt();
    let d = bisect(|d| Ok(uniform_rt(kappa, d, length).0 - half), 0.0, first_zero, 0.0, 0.0)?.root;
    // λ(−d) − λ(+d) written without cancellation.
    let a = 1.0 / spec.bragg_nm();
    let e = d * 1e-9 / (2.0 * std::f64::consts::PI * spec.n_eff);
    Ok(2.0 * e / (a * a - e * e))
}

/// Outcome of [`design_uniform`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GratingDesign {
    pub spec: GratingSpec,
    pub fwhm_nm: f64,
    /// Line-centre transmission dip, dB.
    pub transmission_contrast_db: f64,
    pub peak_reflectance: f64,
    pub kappa_per_m: f64,
    /// Length the design was compared against, mm.
    pub reference_length_mm: f64,
    /// FWHM at the reference length and the target contrast, nm.
    pub reference_length_fwhm_nm: f64,
    /// Whether the reference length meets the FWHM target within 1%.
    pub reference_length_feasible: bool,
}

/// Length prior for gratings written into this fibre, mm.
pub const REFERENCE_LENGTH_MM: f64 = 50.0;
/// Bounds on the designed length (mm) and index modulation.
pub const LENGTH_BOUNDS_MM: (f64, f64) = (0.1, 1000.0);
pub const MAX_DELTA_N: f64 = 1e-2;

fn spec_from(kappa: f64, length_mm: f64, bragg_nm: f64, n_eff: f64) -> GratingSpec {
    GratingSpec {
        length_mm,
        period_nm: bragg_nm / (2.0 * n_eff),
        n_eff,
        delta_n: kappa * bragg_nm * 1e-9 / std::f64::consts::PI,
        visibility: 1.0,
    }
}

fn frontier(bragg_nm: f64, n_eff: f64, kappa_length: f64) -> Vec<(f64, f64)> {
    (1..=10)
        .filter_map(|k| {
            let l = 10.0 * k as f64;
            let spec = spec_from(kappa_length / (l * 1e-3), l, bragg_nm, n_eff);
            reflection_fwhm_nm(&spec).ok().map(|w| (l, w))
        })
        .collect()
}

/// Chooses κ and length so that the reflection FWHM and the line-centre
/// transmission contrast meet the targets. Unit fringe visibility is assumed.
///
/// The two residuals are solved jointly by Newton iteration in
/// (ln κ, ln L) with a finite-difference Jacobian.
pub fn design_uniform(bragg_nm: f64, target_fwhm_nm: f64, target_contrast_db: f64, n_eff: f64) -> Result<GratingDesign> {
    if !(bragg_nm > 0.0 && target_fwhm_nm > 0.0) {
        return Err(Error::validation("Bragg wavelength and FWHM target must be positive"));
    }
    if !(target_contrast_db > 0.0) {
        return Err(Error::validation("contrast target must be positive; zero contrast means no grating"));
    }
    if !(n_eff > 1.3 && n_eff < 1.6) {
        return Err(Error::validation(format!("effective index {n_eff} outside (1.3, 1.6)")));
    }
    let kl = kappa_length_for_contrast(target_contrast_db);
    let residual = |p: [f64; 2]| -> Result<[f64; 2]> {
        let kappa = p[0].exp();
        let length_mm = p[1].exp() * 1e3;
        let spec = spec_from(kappa, length_mm, bragg_nm, n_eff);
        Ok([
            transmission_contrast_db(spec.kappa_length()) / target_contrast_db - 1.0,
            reflection_fwhm_nm(&spec)? / target_fwhm_nm - 1.0,
        ])
    };

    // Starting length from the first-zero bandwidth, about twice the FWHM.
    let lb = bragg_nm * 1e-9;
    let l0 = lb * lb * (kl * kl + std::f64::consts::PI.powi(2)).sqrt() / (std::f64::consts::PI * n_eff * 2.0 * target_fwhm_nm * 1e-9);
    let mut p = [(kl / l0).ln(), l0.ln()];
    let mut f = residual(p)?;
    for _ in 0..100 {
        if f[0].abs() < 1e-12 && f[1].abs() < 1e-12 {
            break;
        }
        let h = 1e-7;
        let f0 = residual([p[0] + h, p[1]])?;
        let f1 = residual([p[0], p[1] + h])?;
        let j = [[(f0[0] - f[0]) / h, (f1[0] - f[0]) / h], [(f0[1] - f[1]) / h, (f1[1] - f[1]) / h]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Numeric { message: "singular design Jacobian".into(), bracket: (p[0], p[1]) });
        }
        let dx = [(f[0] * j[1][1] - f[1] * j[0][1]) / det, (j[0][0] * f[1] - j[1][0] * f[0]) / det];
        // Damped step keeps the iterate inside the region where the lobe
        // bracket is valid.
        let scale = 1.0f64.min(1.0 / dx[0].abs().max(dx[1].abs()).max(1e-300));
        p = [p[0] - scale * dx[0], p[1] - scale * dx[1]];
        f = residual(p)?;
    }
    if !(f[0].abs() < 1e-6 && f[1].abs() < 1e-6) {
        return Err(Error::Numeric { message: format!("grating design did not converge, residuals {f:?}"), bracket: (p[0], p[1]) });
    }
    let kappa = p[0].exp();
    let length_mm = p[1].exp() * 1e3;
    let spec = spec_from(kappa, length_mm, bragg_nm, n_eff);

    if !(length_mm >= LENGTH_BOUNDS_MM.0 && length_mm <= LENGTH_BOUNDS_MM.1) || spec.delta_n > MAX_DELTA_N {
        return Err(Error::Design {
            message: format!(
                "targets need L = {length_mm:.4} mm and δn = {:.3e}, outside L ∈ [{}, {}] mm, δn ≤ {MAX_DELTA_N}",
                spec.delta_n, LENGTH_BOUNDS_MM.0, LENGTH_BOUNDS_MM.1
            ),
            frontier: frontier(bragg_nm, n_eff, kl),
        });
    }

    let reference = spec_from(kl / (REFERENCE_LENGTH_MM * 1e-3), REFERENCE_LENGTH_MM, bragg_nm, n_eff);
    let reference_fwhm = reflection_fwhm_nm(&reference)?;
    Ok(GratingDesign {
        fwhm_nm: reflection_fwhm_nm(&spec)?,
        transmission_contrast_db: transmission_contrast_db(spec.kappa_length()),
        peak_reflectance: uniform_rt(kappa, 0.0, length_mm * 1e-3).0,
        kappa_per_m: kappa,
        spec,
        reference_length_mm: REFERENCE_LENGTH_MM,
        reference_length_fwhm_nm: reference_fwhm,
        reference_length_feasible: ((reference_fwhm - target_fwhm_nm) / target_fwhm_nm).abs() <= 0.01,
    })
}

/// Reflection-arm idler filter on `grid`. With `floor_db` (negative, e.g.
/// −17.5) an out-of-band floor b = R_max·10^(floor_db/10) is added so that
/// the peak-to-background ratio of the reflected spectrum is −floor_db.
pub fn as_idler_filter(spec: &GratingSpec, grid: &SpectralGrid, floor_db: Option<f64>) -> Result<SpectralFilter> {
    let lb = spec.bragg_nm();
    if !(grid.start_nm <= lb - 5.0 && grid.stop_nm >= lb + 5.0) {
        return Err(Error::validation(format!(
            "filter grid [{}, {}] nm must cover the Bragg wavelength {lb:.3} nm ± 5 nm",
            grid.start_nm, grid.stop_nm
        )));
    }
    let mut filter = spectrum_analytic(spec, grid)?;
    if let Some(db) = floor_db {
        if !(db <= 0.0) {
            return Err(Error::validation("filter floor must be given in dB below the peak (≤ 0)"));
        }
        let r_max = filter.reflectance.iter().cloned().fold(0.0, f64::max);
        filter.floor = Some(r_max * 10f64.powf(db / 10.0));
    }
    Ok(filter)
}
