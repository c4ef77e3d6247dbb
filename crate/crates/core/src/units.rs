//! Unit conventions and conversions.
//!
//! Wavelengths cross public interfaces in nanometres (Sellmeier formulas use
//! micrometres), angular frequencies are in rad/s, β in 1/m, the dispersion
//! parameter D in ps/(nm·km) and the nonlinear coefficient γ in 1/(W·km).

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// ps/(nm·km) expressed in s/m².
const PS_PER_NM_KM: f64 = 1e-6;

#[inline]
pub fn omega_from_nm(wavelength_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / (wavelength_nm * 1e-9)
}

#[inline]
pub fn nm_from_omega(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega * 1e9
}

/// β₂ (s²/m) from D (ps/(nm·km)) at the given wavelength: β₂ = −Dλ²/(2πc).
#[inline]
pub fn beta2_from_d(d_ps_nm_km: f64, wavelength_nm: f64) -> f64 {
    let lambda = wavelength_nm * 1e-9;
    -d_ps_nm_km * PS_PER_NM_KM * lambda * lambda / (2.0 * PI * SPEED_OF_LIGHT)
}

/// D (ps/(nm·km)) from β₂ (s²/m): D = −2πcβ₂/λ².
#[inline]
pub fn d_from_beta2(beta2: f64, wavelength_nm: f64) -> f64 {
    let lambda = wavelength_nm * 1e-9;
    -2.0 * PI * SPEED_OF_LIGHT * beta2 / (lambda * lambda) / PS_PER_NM_KM
}

/// γ from 1/(W·km) to 1/(W·m).
#[inline]
pub fn gamma_per_w_m(gamma_per_w_km: f64) -> f64 {
    gamma_per_w_km * 1e-3
}

/// Frequency FWHM (rad/s) of a band of width `fwhm_nm` centred at `center_nm`.
#[inline]
pub fn omega_width_from_nm(center_nm: f64, fwhm_nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT * fwhm_nm * 1e-9 / (center_nm * 1e-9).powi(2)
}
