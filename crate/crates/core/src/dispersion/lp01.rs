//! Scalar LP01 mode of a step-index guide, used as a stand-in for the full
//! PCF mode solution.

use serde::{Deserialize, Serialize};

use super::bessel::{j0, j1, k01_scaled};
use super::material::{check_material_domain, material_index, MaterialModel, PcfDesign};
use crate::numeric::bisect;
use crate::{Error, Result};

/// First zero of J₀; the LP01 core parameter U never reaches it.
const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lp01Solution {
    pub n_eff: f64,
    /// Normalised propagation constant b = (n_eff² − n_clad²)/(n_core² − n_clad²).
    pub b: f64,
    pub v: f64,
    pub u: f64,
    pub w: f64,
}

/// Characteristic function of the LP01 mode in terms of V and b, with the
/// modified Bessel functions exponentially scaled (same zeros):
/// `U·J₁(U)·K₀(W) − W·K₁(W)·J₀(U)`, U = V√(1−b), W = V√b.
pub fn lp01_residual(v: f64, b: f64) -> f64 {
    let u = v * (1.0 - b).sqrt();
    let w = v * b.sqrt();
    let (k0, k1) = k01_scaled(w);
    u * j1(u) * k0 - w * k1 * j0(u)
}

pub fn normalized_frequency(core_index: f64, clad_index: f64, core_diameter_um: f64, wavelength_um: f64) -> f64 {
    std::f64::consts::PI * core_diameter_um / wavelength_um * (core_index * core_index - clad_index * clad_index).sqrt()
}

/// Solves the LP01 eigenvalue equation by bisection in b.
pub fn lp01_solve(core_index: f64, clad_index: f64, core_diameter_um: f64, wavelength_um: f64) -> Result<Lp01Solution> {
    if !(core_index > clad_index && clad_index > 0.0) {
        return Err(Error::validation(format!(
            "LP01 needs core index > cladding index > 0, got {core_index} and {clad_index}"
        )));
    }
    if !(core_diameter_um > 0.0 && wavelength_um > 0.0) {
        return Err(Error::validation("core diameter and wavelength must be positive"));
    }
    let v = normalized_frequency(core_index, clad_index, core_diameter_um, wavelength_um);
    // At b → 0 the residual tends to +∞ (K₀ diverges); at b = 1 it equals
    // −V·K₁(V) < 0. Above V = 2.405, b is bounded below by J₀(U) = 0,
    // where the residual is positive.
    let lower = if v > J0_FIRST_ZERO {
        1.0 - (J0_FIRST_ZERO / v).powi(2)
    } else {
        0.0
    };
    let wrap = |e: Error| match e {
        Error::Numeric { message, bracket } => Error::Numeric {
            message: format!("LP01 at V = {v}: {message}"),
            bracket,
        },
        other => other,
    };
    let b = if lower > 0.0 {
        bisect(|b| Ok(lp01_residual(v, b)), lower, 1.0, 0.0, 0.0).map_err(wrap)?.root
    } else {
        // Weak guidance: b shrinks like exp(−2/V²), so search in ln b.
        let lo = f64::MIN_POSITIVE.ln();
        if lp01_residual(v, f64::MIN_POSITIVE) <= 0.0 {
            0.0
        } else {
            bisect(|s| Ok(lp01_residual(v, s.exp())), lo, 0.0, 0.0, 0.0).map_err(wrap)?.root.exp()
        }
    };
    let n_eff = (clad_index * clad_index + b * (core_index * core_index - clad_index * clad_index)).sqrt();
    Ok(Lp01Solution {
        n_eff,
        b,
        v,
        u: v * (1.0 - b).sqrt(),
        w: v * b.sqrt(),
    })
}

pub fn lp01_effective_index(core_index: f64, clad_index: f64, core_diameter_um: f64, wavelength_um: f64) -> Result<f64> {
    lp01_solve(core_index, clad_index, core_diameter_um, wavelength_um).map(|s| s.n_eff)
}

/// Effective index of the microstructured cladding seen by the core mode.
///
/// The PCF cladding index is not known in closed form; it is a free
/// parameter of the proxy. `SpaceFilling` lowers the host index as
/// `n² = n_host² − strength·(λ/Λ)^exponent`, mimicking the growing share of
/// the cladding field in the air holes at long wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CladdingIndex {
    Constant { index: f64 },
    SpaceFilling { strength: f64, exponent: f64 },
}

/// Step-index LP01 proxy for the doped-core PCF: the core is the Ge-doped
/// region, the cladding an effective medium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepIndexProxy {
    pub design: PcfDesign,
    pub core: MaterialModel,
    pub cladding: CladdingIndex,
}

impl StepIndexProxy {
    /// Cladding strength calibrated so that the nominal design phase matches
    /// a 1064 nm pump to a signal near 808 nm and an idler near 1556 nm.
    pub const NOMINAL_CLADDING_STRENGTH: f64 = 0.1988;

    pub fn nominal() -> Self {
        StepIndexProxy {
            design: PcfDesign::nominal(),
            core: MaterialModel::germanosilicate(0.175),
            cladding: CladdingIndex::SpaceFilling {
                strength: Self::NOMINAL_CLADDING_STRENGTH,
                exponent: 1.5,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        self.core.validate()
    }

    pub fn cladding_index(&self, wavelength_um: f64) -> Result<f64> {
        match self.cladding {
            CladdingIndex::Constant { index } => Ok(index),
            CladdingIndex::SpaceFilling { strength, exponent } => {
                let host = material_index(&MaterialModel::fused_silica(), wavelength_um)?;
                let n2 = host * host - strength * (wavelength_um / self.design.pitch_um).powf(exponent);
                if !(n2 > 1.0) {
                    return Err(Error::validation(format!("effective cladding index below 1 at {wavelength_um} µm")));
                }
                Ok(n2.sqrt())
            }
        }
    }

    pub fn effective_index(&self, wavelength_um: f64) -> Result<f64> {
        check_material_domain(wavelength_um)?;
        let core = material_index(&self.core, wavelength_um)?;
        let clad = self.cladding_index(wavelength_um)?;
        lp01_effective_index(core, clad, self.design.ge_core_diameter_um, wavelength_um)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_between_cladding_and_core() {
        for &(n1, n2, d, l) in &[(1.46, 1.45, 8.0, 1.55), (1.47, 1.40, 1.5, 0.8), (1.5, 1.0, 0.5, 1.9)] {
            let s = lp01_solve(n1, n2, d, l).unwrap();
            assert!(s.n_eff > n2 && s.n_eff < n1);
            assert!(lp01_residual(s.v, s.b).abs() < 1e-10);
        }
    }

    #[test]
    fn strong_guidance_limit() {
        // V > 30
        let s = lp01_solve(1.46, 1.45, 60.0, 1.0).unwrap();
        assert!(s.v > 30.0);
        assert!((s.n_eff - 1.46).abs() < 1e-3);
    }

    #[test]
    fn weak_guidance_limit() {
        let s = lp01_solve(1.46, 1.45, 0.3, 1.55).unwrap();
        assert!(s.v < 0.2);
        assert!((s.n_eff - 1.45).abs() < 1e-4);
    }

    #[test]
    fn rejects_inverted_contrast() {
        assert!(matches!(lp01_effective_index(1.44, 1.45, 8.0, 1.55), Err(Error::Validation(_))));
    }

    #[test]
    fn nominal_proxy_guides_over_material_domain() {
        let p = StepIndexProxy::nominal();
        for l in [0.7, 1.064, 1.55, 1.7] {
            let n = p.effective_index(l).unwrap();
            assert!(n > p.cladding_index(l).unwrap());
        }
    }
}
