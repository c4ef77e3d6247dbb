//! Refractive-index and propagation-constant models for the Ge-doped PCF.
//!
//! Material indices come from Sellmeier sums, the waveguide contribution from
//! a step-index LP01 proxy whose effective cladding index is a free model
//! parameter. Measured GVD, when available, is the authoritative input and is
//! ingested as a polynomial fit of D(λ).

mod bessel;
mod fit;
mod lp01;
mod material;
mod model;

pub use fit::{fit_gvd_polynomial, GvdFit, GvdPolynomial, GvdSample, GvdSamples};
pub use lp01::{lp01_effective_index, lp01_residual, lp01_solve, normalized_frequency, CladdingIndex, Lp01Solution, StepIndexProxy};
pub use material::{material_index, MaterialModel, PcfDesign, Sellmeier, SellmeierTerm, MATERIAL_DOMAIN_UM};
pub use model::{fit_gvd, DispersionModel, FitReport, Representation, DEFAULT_REFERENCE_NM, DESIGN_RANGE_NM};
