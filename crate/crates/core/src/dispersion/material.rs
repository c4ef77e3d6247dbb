//! Sellmeier material indices for fused silica and germanosilicate glass.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Wavelength range (µm) over which the material models are used.
pub const MATERIAL_DOMAIN_UM: (f64, f64) = (0.4, 2.0);

/// One `B·λ²/(λ² − C²)` term of a Sellmeier sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellmeierTerm {
    pub strength: f64,
    /// Resonance wavelength C in µm.
    pub resonance_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sellmeier {
    pub terms: Vec<SellmeierTerm>,
}

impl Sellmeier {
    fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Sellmeier {
            terms: pairs
                .iter()
                .map(|&(strength, resonance_um)| SellmeierTerm { strength, resonance_um })
                .collect(),
        }
    }

    /// Malitson's three-term fit for fused silica.
    pub fn fused_silica() -> Self {
        Self::from_pairs(&[(0.6961663, 0.0684043), (0.4079426, 0.1162414), (0.8974794, 9.896161)])
    }

    /// Fleming's three-term fit for vitreous GeO₂.
    pub fn germania() -> Self {
        Self::from_pairs(&[
            (0.80686642, 0.068972606),
            (0.71815848, 0.15396605),
            (0.85416831, 11.841931),
        ])
    }

    pub fn index(&self, wavelength_um: f64) -> Result<f64> {
        let l2 = wavelength_um * wavelength_um;
        let mut n2 = 1.0;
        for term in &self.terms {
            let denom = l2 - term.resonance_um * term.resonance_um;
            if denom.abs() < 1e-12 {
                return Err(Error::validation(format!(
                    "wavelength {wavelength_um} µm sits on a Sellmeier resonance"
                )));
            }
            n2 += term.strength * l2 / denom;
        }
        if !(n2 > 0.0) {
            return Err(Error::validation(format!("Sellmeier sum gives n² = {n2} at {wavelength_um} µm")));
        }
        Ok(n2.sqrt())
    }
}

/// GeO₂-doped silica with Sellmeier coefficients interpolated linearly in the
/// molar fraction between the host and dopant sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    pub host: Sellmeier,
    pub dopant: Sellmeier,
    pub ge_molar_fraction: f64,
}

impl MaterialModel {
    pub fn fused_silica() -> Self {
        Self::germanosilicate(0.0)
    }

    pub fn germanosilicate(ge_molar_fraction: f64) -> Self {
        MaterialModel {
            host: Sellmeier::fused_silica(),
            dopant: Sellmeier::germania(),
            ge_molar_fraction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let x = self.ge_molar_fraction;
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::validation(format!("GeO2 molar fraction {x} outside [0, 1]")));
        }
        if self.host.terms.len() != self.dopant.terms.len() {
            return Err(Error::validation("host and dopant Sellmeier sets differ in length"));
        }
        Ok(())
    }

    /// Effective Sellmeier set at the configured molar fraction.
    pub fn mixed(&self) -> Sellmeier {
        let x = self.ge_molar_fraction;
        let terms = self
            .host
            .terms
            .iter()
            .zip(&self.dopant.terms)
            .map(|(h, d)| SellmeierTerm {
                strength: h.strength + x * (d.strength - h.strength),
                resonance_um: h.resonance_um + x * (d.resonance_um - h.resonance_um),
            })
            .collect();
        Sellmeier { terms }
    }
}

/// Refractive index of the doped glass at `wavelength_um`.
pub fn material_index(model: &MaterialModel, wavelength_um: f64) -> Result<f64> {
    model.validate()?;
    check_material_domain(wavelength_um)?;
    model.mixed().index(wavelength_um)
}

pub(crate) fn check_material_domain(wavelength_um: f64) -> Result<()> {
    let (lo, hi) = MATERIAL_DOMAIN_UM;
    if !(wavelength_um >= lo && wavelength_um <= hi) {
        return Err(Error::Domain { quantity: "wavelength (µm)", value: wavelength_um, min: lo, max: hi });
    }
    Ok(())
}

/// Geometry of the doped-core PCF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcfDesign {
    pub pitch_um: f64,
    /// Air-hole diameter over pitch, d/Λ.
    pub hole_ratio: f64,
    pub ge_core_diameter_um: f64,
    /// Nominal core–cladding index contrast of the doped preform.
    pub index_contrast: f64,
}

impl PcfDesign {
    /// Core diameter fixed by stacking identical rods cut from a step-index
    /// preform with the given cladding-to-core diameter ratio.
    pub fn from_stacking(pitch_um: f64, hole_ratio: f64, preform_clad_core_ratio: f64, index_contrast: f64) -> Result<Self> {
        if !(preform_clad_core_ratio > 1.0) {
            return Err(Error::validation("preform cladding/core ratio must exceed 1"));
        }
        let design = PcfDesign {
            pitch_um,
            hole_ratio,
            ge_core_diameter_um: pitch_um / preform_clad_core_ratio,
            index_contrast,
        };
        design.validate()?;
        Ok(design)
    }

    /// The nominal Ge-doped PCF: Λ = 2.25 µm, d/Λ = 0.45, preform ratio 1.5,
    /// Δn = 23×10⁻³.
    pub fn nominal() -> Self {
        Self::from_stacking(2.25, 0.45, 1.5, 23e-3).expect("nominal design is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pitch_um > 0.0) {
            return Err(Error::validation("pitch must be positive"));
        }
        if !(self.hole_ratio > 0.0 && self.hole_ratio < 1.0) {
            return Err(Error::validation(format!("hole ratio d/Λ = {} outside (0, 1)", self.hole_ratio)));
        }
        if !(self.ge_core_diameter_um > 0.0) {
            return Err(Error::validation("doped core diameter must be positive"));
        }
        Ok(())
    }

    pub fn hole_diameter_um(&self) -> f64 {
        self.hole_ratio * self.pitch_um
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silica_at_pump_wavelength() {
        // Oracle: direct evaluation of the three-term sum, done by hand
        // outside this crate: n(1.064 µm) = 1.449630989859...
        let n = material_index(&MaterialModel::fused_silica(), 1.064).unwrap();
        assert!((n - 1.4496309898590634).abs() < 1e-13);
        assert!((n - 1.4496).abs() < 1e-4);
    }

    #[test]
    fn zero_fraction_reproduces_silica_exactly() {
        let m = MaterialModel::germanosilicate(0.0);
        let s = Sellmeier::fused_silica();
        assert_eq!(m.mixed(), s);
        for l in [0.4, 0.8, 1.064, 1.55, 2.0] {
            assert_eq!(material_index(&m, l).unwrap(), s.index(l).unwrap());
        }
    }

    #[test]
    fn doped_contrast_fixture() {
        // Regression fixture for the interpolated Sellmeier at x = 0.175.
        let doped = material_index(&MaterialModel::germanosilicate(0.175), 1.55).unwrap();
        let pure = material_index(&MaterialModel::fused_silica(), 1.55).unwrap();
        let contrast = doped - pure;
        assert!(contrast > 0.0);
        assert!((contrast - 0.026081766398774686).abs() < 1e-12, "contrast {contrast}");
    }

    #[test]
    fn repeated_calls_identical() {
        let m = MaterialModel::germanosilicate(0.1);
        assert_eq!(material_index(&m, 1.3).unwrap(), material_index(&m, 1.3).unwrap());
    }

    #[test]
    fn domain_and_validation_errors() {
        let m = MaterialModel::fused_silica();
        assert!(matches!(material_index(&m, 0.3), Err(Error::Domain { .. })));
        assert!(matches!(material_index(&m, 2.5), Err(Error::Domain { .. })));
        let bad = MaterialModel::germanosilicate(1.2);
        assert!(matches!(material_index(&bad, 1.0), Err(Error::Validation(_))));
    }

    #[test]
    fn nominal_design_stacking() {
        let d = PcfDesign::nominal();
        assert!((d.ge_core_diameter_um - 0.67 * d.pitch_um).abs() < 0.005 * d.pitch_um);
        assert!(d.hole_ratio > 0.0 && d.hole_ratio < 1.0);
        assert!(PcfDesign::from_stacking(2.0, 1.2, 1.5, 0.02).is_err());
    }
}
